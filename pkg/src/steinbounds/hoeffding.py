"""Exact Hoeffding decomposition and variance identities over finite alphabets.

Everything here is computed by full enumeration (dense tables over E^n), so
residual tolerances are pure floating-point noise rather than statistical
error.  Monte Carlo fallbacks for the variance bounds live in bounds.py.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .core import DEFAULT_ENUMERATION_CAP, Distribution, Functional, value_table
from .errors import ArityTooLarge, CapExceeded


def kappa(n: int, size: int) -> float:
    """Weight of one subset of the given size in the interpolation formula."""
    return 1.0 / (comb(n, size) * (n - size))


def harmonic_number(n: int) -> float:
    return sum(1.0 / k for k in range(1, n + 1))


def kappa_total(n: int) -> float:
    """Sum of kappa over all strict subsets; equals the n-th harmonic number."""
    return sum(comb(n, a) * kappa(n, a) for a in range(n))


def kappa_total_excluding(n: int, j: int) -> float:
    """Sum of kappa over strict subsets avoiding one coordinate; equals 1."""
    del j  # by symmetry the answer does not depend on the coordinate
    return sum(comb(n - 1, a) * kappa(n, a) for a in range(n))


def expect_over(table: np.ndarray, weights: np.ndarray) -> float:
    """Expectation of a dense table whose axes are all weighted by `weights`."""
    out = np.asarray(table, dtype=float)
    while out.ndim > 0:
        out = np.tensordot(weights, out, axes=([0], [0]))
    return float(out)


def conditional_mean(table: np.ndarray, weights: np.ndarray,
                     pinned: Sequence[int]) -> np.ndarray:
    """Average the table over all axes not in `pinned`.

    Result axes correspond to sorted(pinned).
    """
    pinned = set(pinned)
    out = np.asarray(table, dtype=float)
    for ax in sorted(set(range(out.ndim)) - pinned, reverse=True):
        out = np.tensordot(out, weights, axes=([ax], [0]))
    return out


@dataclass(frozen=True)
class HoeffdingKernel:
    """One degenerate kernel of the decomposition, tabulated over E^|B|."""

    index_set: Tuple[int, ...]
    table: np.ndarray

    def __call__(self, config: np.ndarray) -> float:
        return float(self.table[tuple(np.asarray(config)[list(self.index_set)])])


@dataclass
class DecompositionReport:
    mean: float
    kernels: Dict[Tuple[int, ...], HoeffdingKernel]
    per_kernel_second_moment: Dict[Tuple[int, ...], float]
    weights: np.ndarray
    table: np.ndarray


def _kernel_table(table: np.ndarray, weights: np.ndarray,
                  index_set: Tuple[int, ...],
                  mean_cache: Optional[dict] = None) -> np.ndarray:
    """Moebius alternating sum of conditional means over subsets of index_set.

    The sign convention makes this equal (-1)^k times the conditional
    expectation of the order-k iterated difference with base vector X' and
    replacements from X.
    """
    k_sz = len(weights)
    b = tuple(sorted(index_set))
    out = np.zeros((k_sz,) * len(b))
    for r in range(len(b) + 1):
        for sub in itertools.combinations(b, r):
            if mean_cache is not None and sub in mean_cache:
                m = mean_cache[sub]
            else:
                m = conditional_mean(table, weights, sub)
                if mean_cache is not None:
                    mean_cache[sub] = m
            shape = tuple(k_sz if i in sub else 1 for i in b)
            out += (-1) ** (len(b) - r) * m.reshape(shape)
    return out


def hoeffding_kernel(f: Functional, dist: Distribution,
                     index_set: Sequence[int], n: Optional[int] = None,
                     cap: int = DEFAULT_ENUMERATION_CAP) -> HoeffdingKernel:
    """Exact degenerate kernel for one index set, by full enumeration."""
    if n is None:
        if f.arity is None:
            raise ValueError("n required for variable-length functionals")
        n = f.arity
    table = value_table(f, dist, n, cap=cap)
    b = tuple(sorted(int(i) for i in index_set))
    return HoeffdingKernel(b, _kernel_table(table, dist.weights, b))


def decompose_table(table: np.ndarray, weights: np.ndarray) -> DecompositionReport:
    n = table.ndim
    if n > 12:
        raise ArityTooLarge(f"decomposition enumerates 2^n kernels; n={n} > 12")
    mean_cache: dict = {}
    kernels = {}
    moments = {}
    for k in range(1, n + 1):
        for b in itertools.combinations(range(n), k):
            tab = _kernel_table(table, weights, b, mean_cache)
            kernels[b] = HoeffdingKernel(b, tab)
            moments[b] = expect_over(tab**2, weights)
    mean = expect_over(table, weights)
    return DecompositionReport(mean, kernels, moments, weights, np.asarray(table))


def decompose(f: Functional, dist: Distribution, n: Optional[int] = None,
              cap: int = DEFAULT_ENUMERATION_CAP) -> DecompositionReport:
    """All 2^n - 1 kernels plus the mean; reconstruction holds to 1e-10."""
    if n is None:
        if f.arity is None:
            raise ValueError("n required for variable-length functionals")
        n = f.arity
    table = value_table(f, dist, n, cap=cap)
    return decompose_table(table, dist.weights)


def reconstruction_residual(report: DecompositionReport) -> float:
    """Max abs difference between f and mean + sum of kernels, over E^n."""
    n = report.table.ndim
    k_sz = len(report.weights)
    total = np.full_like(report.table, report.mean)
    for b, kern in report.kernels.items():
        shape = tuple(k_sz if i in b else 1 for i in range(n))
        total = total + kern.table.reshape(shape)
    return float(np.max(np.abs(total - report.table)))


def degeneracy_residual(report: DecompositionReport) -> float:
    """Max abs conditional mean of any kernel over any single coordinate."""
    worst = 0.0
    for b, kern in report.kernels.items():
        for ax in range(len(b)):
            cond = np.tensordot(kern.table, report.weights, axes=([ax], [0]))
            worst = max(worst, float(np.max(np.abs(cond))))
    return worst


def orthogonality_matrix(report: DecompositionReport) -> tuple[list, np.ndarray]:
    """Pairwise expectations of kernel products; off-diagonals vanish."""
    keys = sorted(report.kernels.keys(), key=lambda b: (len(b), b))
    k_sz = len(report.weights)
    mats = np.zeros((len(keys), len(keys)))
    for a_i, b1 in enumerate(keys):
        for a_j, b2 in enumerate(keys):
            if a_j < a_i:
                continue
            union = tuple(sorted(set(b1) | set(b2)))
            sh1 = tuple(k_sz if i in b1 else 1 for i in union)
            sh2 = tuple(k_sz if i in b2 else 1 for i in union)
            prod = (report.kernels[b1].table.reshape(sh1)
                    * report.kernels[b2].table.reshape(sh2))
            val = expect_over(prod, report.weights)
            mats[a_i, a_j] = mats[a_j, a_i] = val
    return keys, mats


def variance_expansion(report: DecompositionReport) -> float:
    """Sum of kernel second moments; equals the variance of f(X)."""
    return float(sum(report.per_kernel_second_moment.values()))


def direct_variance(table: np.ndarray, weights: np.ndarray) -> float:
    return expect_over(np.asarray(table) ** 2, weights) - expect_over(table, weights) ** 2


def variance_lower_bound_exact(table: np.ndarray, weights: np.ndarray) -> float:
    """Sum over coordinates of the squared first-order conditional difference.

    Equals the total second moment of the singleton kernels.
    """
    n = table.ndim
    mean_cache: dict = {}
    total = 0.0
    for i in range(n):
        tab = _kernel_table(table, weights, (i,), mean_cache)
        total += expect_over(tab**2, weights)
    return total


def efron_stein_upper_exact(table: np.ndarray, weights: np.ndarray) -> float:
    """Half the sum over coordinates of the mean squared resampling difference."""
    n = table.ndim
    ef2 = expect_over(np.asarray(table) ** 2, weights)
    total = 0.0
    for i in range(n):
        rest = tuple(j for j in range(n) if j != i)
        m_rest = conditional_mean(table, weights, rest)
        cross = expect_over(m_rest**2, weights)
        # E (f(X) - f(X^i))^2 = 2 E f^2 - 2 E[f(X) f(X^i)]
        total += 0.5 * (2.0 * ef2 - 2.0 * cross)
    return total


def paired_expectation(table_g: np.ndarray, table_f: np.ndarray,
                       weights: np.ndarray, repl_g: Sequence[int],
                       repl_f: Sequence[int],
                       mean_cache_g: Optional[dict] = None,
                       mean_cache_f: Optional[dict] = None) -> float:
    """E[g(X^{C1}) f(X^{C2})] for independent X, X' and replacement sets C1, C2.

    Coordinates read from the same copy by both factors stay shared; the rest
    average out independently, so the expectation reduces to the weighted
    inner product of two conditional-mean tables over the shared coordinates.
    """
    n = table_g.ndim
    c1, c2 = set(repl_g), set(repl_f)
    shared = tuple(i for i in range(n) if (i in c1) == (i in c2))
    if mean_cache_g is not None and shared in mean_cache_g:
        mg = mean_cache_g[shared]
    else:
        mg = conditional_mean(table_g, weights, shared)
        if mean_cache_g is not None:
            mean_cache_g[shared] = mg
    if mean_cache_f is not None and shared in mean_cache_f:
        mf = mean_cache_f[shared]
    else:
        mf = conditional_mean(table_f, weights, shared)
        if mean_cache_f is not None:
            mean_cache_f[shared] = mf
    return expect_over(mg * mf, weights)


def delta_j_cross_expectation(table_g: np.ndarray, table_f: np.ndarray,
                              weights: np.ndarray, j: int,
                              subset: Sequence[int],
                              cache_g: Optional[dict] = None,
                              cache_f: Optional[dict] = None) -> float:
    """E of the first-order difference of g at j times that of f at j after
    substituting the subset coordinates from the independent copy."""
    a = tuple(sorted(set(subset)))
    if j in a:
        raise ValueError("j must lie outside the substituted subset")
    aj = tuple(sorted(a + (j,)))
    args = (weights,)
    kw = dict(mean_cache_g=cache_g, mean_cache_f=cache_f)
    return (
        paired_expectation(table_g, table_f, *args, repl_g=(), repl_f=a, **kw)
        - paired_expectation(table_g, table_f, *args, repl_g=(), repl_f=aj, **kw)
        - paired_expectation(table_g, table_f, *args, repl_g=(j,), repl_f=a, **kw)
        + paired_expectation(table_g, table_f, *args, repl_g=(j,), repl_f=aj, **kw)
    )


def covariance_identity_residual(table_f: np.ndarray, table_g: np.ndarray,
                                 weights: np.ndarray) -> float:
    """Absolute gap between Cov(f, g) and its subset-interpolation expansion."""
    n = table_f.ndim
    if n > 8:
        raise ArityTooLarge(f"covariance identity enumerates 2^n subsets; n={n} > 8")
    cov = (paired_expectation(table_g, table_f, weights, (), ())
           - expect_over(table_g, weights) * expect_over(table_f, weights))
    cache_g: dict = {}
    cache_f: dict = {}
    rhs = 0.0
    for size in range(n):
        k = kappa(n, size)
        for a in itertools.combinations(range(n), size):
            for j in range(n):
                if j in a:
                    continue
                rhs += k * delta_j_cross_expectation(
                    table_g, table_f, weights, j, a, cache_g, cache_f)
    return abs(cov - 0.5 * rhs)


def exact_t_subset_expectation(table: np.ndarray, weights: np.ndarray,
                               subset: Sequence[int],
                               cache: Optional[dict] = None) -> float:
    """Exact expectation of the subset statistic: the sum over coordinates
    outside the subset of products of first-order differences."""
    n = table.ndim
    a = tuple(sorted(set(subset)))
    total = 0.0
    for j in range(n):
        if j in a:
            continue
        total += delta_j_cross_expectation(table, table, weights, j, a,
                                           cache, cache)
    return total


def exact_t_expectation(table: np.ndarray, weights: np.ndarray) -> float:
    """Exact E[T]: half the kappa-weighted sum over strict subsets.

    Equals Var f(X) by the covariance interpolation identity.
    """
    n = table.ndim
    if n > 8:
        raise CapExceeded(f"exact T enumeration limited to n <= 8, got {n}")
    cache: dict = {}
    total = 0.0
    for size in range(n):
        k = kappa(n, size)
        for a in itertools.combinations(range(n), size):
            total += k * exact_t_subset_expectation(table, weights, a, cache)
    return 0.5 * total
