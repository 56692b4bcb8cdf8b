"""Replication orchestration, empirical distance to the normal law, and
log-log convergence-rate fitting."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.special import ndtr

from .core import ROLE_X, Distribution, Functional, SeedPolicy, sample_iid
from .errors import NonpositiveValue, TooFewSamples


@dataclass
class ReplicationResult:
    values: np.ndarray
    mean: float
    variance: float
    se_mean: float
    variance_se: float

    @property
    def reps(self) -> int:
        return len(self.values)


def replicate(f: Union[Functional, Callable[[int], Functional]],
              dist: Distribution, n: int, reps: int,
              policy: SeedPolicy) -> ReplicationResult:
    """Independent evaluations of f on fresh configurations, one stream per
    replication index.

    f may be a Functional or a factory rep -> Functional; the factory form is
    used by grid-based functionals that re-jitter their integration grid per
    replication.
    """
    values = np.empty(reps)
    is_factory = not isinstance(f, Functional)
    for rep in range(reps):
        fn = f(rep) if is_factory else f
        x = sample_iid(dist, n, policy.stream(rep, ROLE_X))
        values[rep] = fn(x)
    var = float(np.var(values, ddof=1)) if reps > 1 else 0.0
    centered = values - values.mean()
    if reps > 3:
        m4 = float(np.mean(centered**4))
        var_se = float(np.sqrt(max(m4 - (reps - 3) / (reps - 1) * var**2, 0.0)
                               / reps))
    else:
        var_se = float("inf")
    return ReplicationResult(
        values=values,
        mean=float(values.mean()),
        variance=var,
        se_mean=float(np.sqrt(var / reps)) if reps > 1 else float("inf"),
        variance_se=var_se,
    )


def empirical_kolmogorov_sorted(sorted_sample: np.ndarray) -> float:
    """Sup over the jump points of |ECDF - Phi|; the sup of the step-function
    deviation is always attained at a jump."""
    r = len(sorted_sample)
    cdf = ndtr(sorted_sample)
    hi = np.abs(np.arange(1, r + 1) / r - cdf)
    lo = np.abs(np.arange(0, r) / r - cdf)
    return float(np.maximum(hi, lo).max())


def dkw_band(r: int, level: float = 0.05) -> float:
    return float(np.sqrt(np.log(2.0 / level) / (2.0 * r)))


def empirical_kolmogorov(sample: Sequence[float], standardize: bool = True,
                         level: float = 0.05) -> tuple[float, float]:
    """Empirical Kolmogorov distance to the standard normal with its DKW
    confidence band.

    With standardize=True the sample is centered and scaled by its own
    moments first (degenerate samples map to +-0 scores and give a distance
    near 1/2).
    """
    x = np.asarray(sample, dtype=float)
    r = len(x)
    if r < 100:
        raise TooFewSamples(f"need >= 100 samples, got {r}")
    if standardize:
        sd = np.std(x, ddof=1)
        if sd == 0:
            x = np.zeros_like(x)
        else:
            x = (x - x.mean()) / sd
    return empirical_kolmogorov_sorted(np.sort(x)), dkw_band(r, level)


@dataclass
class RateFit:
    exponent: float
    exponent_se: float
    intercept: float
    r2: float
    ns: np.ndarray
    values: np.ndarray
    ses: Optional[np.ndarray] = None
    excluded_ns: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "exponent": self.exponent,
            "exponent_se": self.exponent_se,
            "intercept": self.intercept,
            "r2": self.r2,
            "ns": [int(v) for v in self.ns],
            "values": [float(v) for v in self.values],
            "excluded_ns": [int(v) for v in self.excluded_ns],
        }
        if self.ses is not None:
            out["ses"] = [float(v) for v in self.ses]
        return out


def fit_rate(ns: Sequence[float], values: Sequence[float],
             ses: Optional[Sequence[float]] = None,
             max_rel_se: float = 0.25) -> RateFit:
    """Least squares on (log n, log value).

    Needs at least three sizes and strictly positive values.  When standard
    errors are supplied and the smallest size is noise-dominated (relative
    se above max_rel_se), that point is dropped, provided three sizes remain.
    """
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    ses_arr = None if ses is None else np.asarray(ses, dtype=float)
    if len(ns) < 3:
        raise NonpositiveValue(f"rate fit needs >= 3 sizes, got {len(ns)}")
    if np.any(values <= 0):
        raise NonpositiveValue("rate fit needs strictly positive values")
    order = np.argsort(ns)
    ns, values = ns[order], values[order]
    if ses_arr is not None:
        ses_arr = ses_arr[order]
    excluded = []
    if (ses_arr is not None and len(ns) > 3
            and ses_arr[0] > max_rel_se * values[0]):
        excluded = [ns[0]]
        ns, values = ns[1:], values[1:]
        ses_arr = ses_arr[1:]
    lx = np.log(ns)
    ly = np.log(values)
    k = len(lx)
    xbar = lx.mean()
    sxx = float(((lx - xbar) ** 2).sum())
    slope = float(((lx - xbar) * (ly - ly.mean())).sum() / sxx)
    intercept = float(ly.mean() - slope * xbar)
    resid = ly - (intercept + slope * lx)
    rss = float((resid**2).sum())
    tss = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if tss == 0 else max(0.0, 1.0 - rss / tss)
    if k > 2:
        slope_se = float(np.sqrt(rss / (k - 2) / sxx))
    else:
        slope_se = 0.0
    return RateFit(exponent=slope, exponent_se=slope_se, intercept=intercept,
                   r2=r2, ns=ns, values=values, ses=ses_arr,
                   excluded_ns=excluded)
