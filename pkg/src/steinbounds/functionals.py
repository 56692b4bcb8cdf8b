"""Named distributions, shapes, and functionals used by the CLI and the
experiment drivers.

Grid-based functionals are returned as factories (replication index ->
Functional) so each replication gets its own jittered integration grid from
the integration stream.
"""

from __future__ import annotations

from typing import Callable, Union

import numpy as np

from .core import (
    ROLE_INTEGRATION,
    Distribution,
    Functional,
    SeedPolicy,
    alphabet,
    cube,
    symbol_values,
)
from .errors import ConfigError
from .geometry import (
    AxisBox,
    Ball,
    ConstantRadius,
    HalfInterval,
    KochFlake,
    ParetoRadius,
    UniformRadius,
    covering_functionals,
    make_grid,
    nn_functional,
    voronoi_functional,
)

FunctionalOrFactory = Union[Functional, Callable[[int], Functional]]


def make_distribution(name: str, skew: bool = False) -> Distribution:
    """Distribution by id: pm1, bit, alphabet<k>, cube<d>.

    skew replaces uniform alphabet weights with a fixed decreasing profile.
    """
    if name == "pm1":
        return alphabet((-1.0, 1.0))
    if name == "bit":
        return alphabet((0.0, 1.0))
    if name.startswith("alphabet"):
        k = int(name[len("alphabet"):] or 2)
        weights = None
        if skew:
            raw = np.arange(1, k + 1, dtype=float)[::-1]
            weights = raw / raw.sum()
        return alphabet(tuple(float(v) for v in range(k)), weights)
    if name.startswith("cube"):
        d = int(name[len("cube"):] or 1)
        return cube(d)
    raise ConfigError(f"unknown distribution id: {name}")


def make_shape(kind: str, d: int = 2, radius: float = 0.3,
               threshold: float = 0.5, depth: int = 4):
    if kind == "ball":
        return Ball(center=(0.5,) * d, radius=radius)
    if kind == "box":
        return AxisBox(lo=(0.25,) * d, hi=(0.75,) * d)
    if kind == "half-interval":
        return HalfInterval(threshold)
    if kind == "koch-flake":
        return KochFlake(depth=depth)
    raise ConfigError(f"unknown shape kind: {kind}")


def make_radius_law(kind: str, radius: float = 0.5, lo: float = 0.25,
                    hi: float = 0.75, exponent: float = 17.0):
    if kind == "constant":
        return ConstantRadius(radius)
    if kind == "uniform":
        return UniformRadius(lo, hi)
    if kind == "pareto":
        return ParetoRadius(radius, exponent)
    raise ConfigError(f"unknown radius law: {kind}")


def _symbol_count_sums(vals: np.ndarray, rows: np.ndarray, powers=(1,)):
    """Per-row sums of symbol-value powers computed from symbol counts, so
    the result depends on the configuration only through its multiset."""
    out = [np.zeros(len(rows)) for _ in powers]
    for k, v in enumerate(vals):
        hits = (rows == k).sum(axis=1)
        for slot, p in enumerate(powers):
            out[slot] += (v**p) * hits
    return out


def sum_functional(dist: Distribution) -> Functional:
    """Sum of coordinate values (alphabet symbols or cube coordinates).

    Alphabet sums go through symbol counts and cube sums through sorting, so
    the value is exactly invariant under permutations, as the symmetric flag
    promises.
    """
    if dist.is_finite:
        vals = symbol_values(dist)
        k_sz = len(vals)

        def ev(idx):
            counts = np.bincount(np.asarray(idx, dtype=np.int64),
                                 minlength=k_sz)
            return float(counts @ vals)

        return Functional(
            evaluate=ev,
            evaluate_batch=lambda rows: _symbol_count_sums(vals, rows)[0],
            arity=None, symmetric=True, name="sum",
        )
    return Functional(
        evaluate=lambda pts: float(np.sort(np.asarray(pts).reshape(-1)).sum()),
        evaluate_batch=lambda rows: np.sort(
            rows.reshape(len(rows), -1), axis=1).sum(axis=1),
        arity=None, symmetric=True, name="sum",
    )


def pair_product_functional(dist: Distribution) -> Functional:
    """Sum of products over coordinate pairs (second-order interactions)."""
    if not dist.is_finite:
        raise ConfigError("pairprod needs a finite alphabet")
    vals = symbol_values(dist)
    k_sz = len(vals)

    def ev(idx):
        counts = np.bincount(np.asarray(idx, dtype=np.int64), minlength=k_sz)
        s1 = float(counts @ vals)
        s2 = float(counts @ vals**2)
        return (s1 * s1 - s2) / 2.0

    def ev_batch(rows):
        s1, s2 = _symbol_count_sums(vals, rows, powers=(1, 2))
        return (s1 * s1 - s2) / 2.0

    return Functional(evaluate=ev, evaluate_batch=ev_batch, arity=None,
                      symmetric=True, name="pairprod")


def voronoi_factory(shape, grid_m: int, policy: SeedPolicy) -> Callable[[int], Functional]:
    def factory(rep: int) -> Functional:
        grid = make_grid(shape.d, grid_m, policy.stream(rep, ROLE_INTEGRATION))
        return voronoi_functional(shape, grid)

    return factory


def covering_factory(law, n: int, d: int, density: float,
                     policy: SeedPolicy, which: str) -> Callable[[int], Functional]:
    side = n ** (1.0 / d)
    m = max(int(density * n), 16)

    def factory(rep: int) -> Functional:
        grid = make_grid(d, m, policy.stream(rep, ROLE_INTEGRATION), extent=side)
        f_v, f_i = covering_functionals(law, grid, side)
        return f_v if which == "volume" else f_i

    return factory


def make_functional(fid: str, dist: Distribution, n: int,
                    policy: SeedPolicy, shape=None, grid_m: int = 20000,
                    density: float = 128.0, law=None) -> FunctionalOrFactory:
    """Functional (or per-replication factory) by id."""
    if fid == "sum":
        return sum_functional(dist)
    if fid == "pairprod":
        return pair_product_functional(dist)
    if fid == "nn-distance":
        if dist.is_finite:
            raise ConfigError("nn-distance needs a cube distribution")
        return nn_functional()
    if fid == "voronoi":
        if dist.is_finite:
            raise ConfigError("voronoi needs a cube distribution")
        if shape is None:
            shape = make_shape("ball", d=dist.space.d)
        return voronoi_factory(shape, grid_m, policy)
    if fid in ("covering-volume", "covering-isolated"):
        if dist.is_finite or dist.space.d < 2:
            raise ConfigError("covering needs a cube distribution with d = "
                              "spatial dim + 1 (last coordinate drives the radius)")
        if law is None:
            law = ConstantRadius(0.5)
        which = "volume" if fid.endswith("volume") else "isolated"
        return covering_factory(law, n, dist.space.d - 1, density, policy, which)
    raise ConfigError(f"unknown functional id: {fid}")


FUNCTIONAL_IDS = ("sum", "pairprod", "nn-distance", "voronoi",
                  "covering-volume", "covering-isolated")
