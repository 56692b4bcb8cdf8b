"""Germ-grain (boolean) covering model on the volume-n cube.

Grains are balls; functionals are grid-decided: the covered volume is the
grid measure of the union, and a pair of grains counts as intersecting inside
the window exactly when some grid point lies in both balls (the exact
center-distance test serves as a broad phase).  This makes both functionals
deterministic functions of (configuration, grid), so deletion differences are
exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core import Functional
from ..errors import DimensionMismatch
from .grid import IntegrationGrid


@dataclass(frozen=True)
class ConstantRadius:
    value: float
    kind: str = "constant"

    def quantile(self, u: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(u, dtype=float), self.value)

    def moment_finite(self, order: float) -> bool:
        return True


@dataclass(frozen=True)
class UniformRadius:
    lo: float
    hi: float
    kind: str = "uniform"

    def quantile(self, u: np.ndarray) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * np.asarray(u, dtype=float)

    def moment_finite(self, order: float) -> bool:
        return True


@dataclass(frozen=True)
class ParetoRadius:
    scale: float
    exponent: float
    kind: str = "pareto"

    def quantile(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return self.scale * (1.0 - u) ** (-1.0 / self.exponent)

    def moment_finite(self, order: float) -> bool:
        return order < self.exponent


@dataclass(frozen=True)
class GermGrain:
    """Ball grains at i.i.d. uniform germs in the cube of volume n."""

    centers: np.ndarray   # (n, d), inside [0, side]^d
    radii: np.ndarray     # (n,)
    side: float
    volume_moment_ok: bool = True     # E R^{5d} finite, needed for f_V rates
    isolation_moment_ok: bool = True  # E R^{8d} finite, needed for f_I rates


def germ_grain_from_config(config: np.ndarray, law, side: float) -> GermGrain:
    """Map a configuration on [0,1]^{d+1} to germs + grain radii.

    The first d coordinates scale to the volume-n window; the last feeds the
    radius law's quantile, keeping the whole model a functional of i.i.d.
    uniforms.
    """
    u = np.asarray(config, dtype=float)
    if u.ndim != 2 or u.shape[1] < 2:
        raise DimensionMismatch("covering configs need shape (n, d+1)")
    d = u.shape[1] - 1
    return GermGrain(
        centers=u[:, :d] * side,
        radii=law.quantile(u[:, d]),
        side=float(side),
        volume_moment_ok=law.moment_finite(5 * d),
        isolation_moment_ok=law.moment_finite(8 * d),
    )


def _candidate_hits(grain: GermGrain, grid: IntegrationGrid):
    """(ball index, stratum index) pairs for every grid point covered by each
    ball, via bounding-box stratum enumeration."""
    centers, radii = grain.centers, grain.radii
    nb, d = centers.shape
    s = grid.strata_per_axis
    cell = grid.stratum_side
    lo = np.clip(np.floor((centers - radii[:, None]) / cell).astype(np.int64), 0, s - 1)
    hi = np.clip(np.floor((centers + radii[:, None]) / cell).astype(np.int64), 0, s - 1)
    cnt = hi - lo + 1
    per_ball = cnt.prod(axis=1)
    total = int(per_ball.sum())
    if total == 0:
        return (np.empty(0, dtype=np.int64),) * 2
    ball_id = np.repeat(np.arange(nb), per_ball)
    starts = np.concatenate([[0], np.cumsum(per_ball)[:-1]])
    local = np.arange(total) - np.repeat(starts, per_ball)
    # decompose the local linear index into per-axis offsets (row-major)
    stride = np.ones((nb, d), dtype=np.int64)
    for ax in range(d - 2, -1, -1):
        stride[:, ax] = stride[:, ax + 1] * cnt[:, ax + 1]
    flat = np.zeros(total, dtype=np.int64)
    grid_stride = np.array([s ** (d - 1 - ax) for ax in range(d)], dtype=np.int64)
    for ax in range(d):
        offs = (local // stride[ball_id, ax]) % cnt[ball_id, ax]
        flat += (lo[ball_id, ax] + offs) * grid_stride[ax]
    pts = grid.points[flat]
    inside = ((pts - centers[ball_id]) ** 2).sum(axis=1) <= radii[ball_id] ** 2
    return ball_id[inside], flat[inside]


def covering_volume_and_isolated(grain: GermGrain,
                                 grid: IntegrationGrid) -> Tuple[float, int]:
    """Covered volume of the union and the number of isolated grains.

    A grain is isolated when it shares no grid point with any other grain.
    """
    n = len(grain.centers)
    ball_id, flat = _candidate_hits(grain, grid)
    if len(flat) == 0:
        return 0.0, n
    covered = len(np.unique(flat))
    f_v = covered * grid.weight
    order = np.argsort(flat, kind="stable")
    flat_sorted = flat[order]
    ball_sorted = ball_id[order]
    _, counts = np.unique(flat_sorted, return_counts=True)
    mult = np.repeat(counts, counts)
    non_isolated = np.zeros(n, dtype=bool)
    non_isolated[ball_sorted[mult >= 2]] = True
    return float(f_v), int(n - non_isolated.sum())


def covering_functionals(law, grid: IntegrationGrid,
                         side: float) -> Tuple[Functional, Functional]:
    """Covered-volume and isolated-count functionals over [0,1]^{d+1}
    configurations, sharing one window side and grid."""

    def f_v(config):
        grain = germ_grain_from_config(config, law, side)
        return covering_volume_and_isolated(grain, grid)[0]

    def f_i(config):
        grain = germ_grain_from_config(config, law, side)
        return float(covering_volume_and_isolated(grain, grid)[1])

    return (
        Functional(evaluate=f_v, arity=None, symmetric=True, name="covering-volume"),
        Functional(evaluate=f_i, arity=None, symmetric=True, name="covering-isolated"),
    )
