"""Monte Carlo estimation of the normal-approximation bound terms.

Implements the subset sampler with the kappa/harmonic reweighting, nested
conditional-variance estimation with ANOVA bias correction, both Kolmogorov
bound forms plus the Wasserstein bound for arbitrary functionals, the
recombination-based geometric bound for symmetric functionals, and the
deletion-moment inequality check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .core import (
    ROLE_PRIME,
    ROLE_SUBSET,
    ROLE_TILDE,
    ROLE_X,
    Distribution,
    Functional,
    SeedPolicy,
    sample_iid,
)
from .diffops import BASE, PRIME, TILDE, deleted, recombine, substituted
from .errors import AsymmetricFunctional, DegenerateVariance, FixedArityFunctional
from .hoeffding import harmonic_number
from .mc import dkw_band, empirical_kolmogorov_sorted
from .stein import SQRT_2PI

# Leading constant of the geometric bound's recombination bracket; kept as a
# knob so sensitivity to it can be explored without code changes.
GRAPH_CONSTANT = 4.0 * np.sqrt(2.0)


@dataclass(frozen=True)
class SubsetSampler:
    """Samples strict subsets A of {0..n-1} with P(A) = kappa_{n,A} / H_n.

    The size marginal is P(|A| = a) proportional to 1/(n - a); given the
    size, the subset is uniform.
    """

    n: int

    @property
    def harmonic(self) -> float:
        return harmonic_number(self.n)

    def size_probabilities(self) -> np.ndarray:
        sizes = np.arange(self.n)
        p = 1.0 / (self.n - sizes)
        return p / p.sum()

    def sample(self, stream: np.random.Generator) -> np.ndarray:
        a = int(stream.choice(self.n, p=self.size_probabilities()))
        if a == 0:
            return np.empty(0, dtype=np.int64)
        return np.sort(stream.choice(self.n, size=a, replace=False))


@dataclass
class BoundConfig:
    policy: SeedPolicy = field(default_factory=SeedPolicy)
    outer: int = 400
    k_inner: int = 8
    bootstrap: int = 200
    dkw_level: float = 0.05


def _se_of_variance(sample: np.ndarray) -> float:
    """Standard error of the sample variance (moment formula)."""
    r = len(sample)
    if r < 4:
        return float("inf")
    centered = sample - sample.mean()
    m4 = float(np.mean(centered**4))
    s2 = float(np.var(sample, ddof=1))
    inner = m4 - (r - 3) / (r - 1) * s2**2
    return float(np.sqrt(max(inner, 0.0) / r))


@dataclass
class OuterRecord:
    """Per-outer-replication statistics from the inner (X', A) sampling."""

    f_x: float
    t_raw: np.ndarray        # (H_n/2)-scaled subset statistics, one per inner
    tp_raw: np.ndarray
    sizes: np.ndarray        # n - |A| per inner draw
    mixed_raw: np.ndarray    # H_n-reweighted sum_j |dj(X)^2 dj(X^A)|
    abs_d1: np.ndarray       # |Delta_1 f(X, X')| per inner
    third_all_j: float       # sum over all j of |Delta_j f|^3 (one inner)
    sixth_all_j: float


def _substitution_batch(f: Functional, base: np.ndarray, xp: np.ndarray,
                        positions: np.ndarray) -> np.ndarray:
    """Values of f at copies of base with one coordinate (per row) replaced
    from xp."""
    rows = np.repeat(base[None, ...], len(positions), axis=0)
    rows[np.arange(len(positions)), positions] = xp[positions]
    return f.batch(rows)


def sample_outer_record(f: Functional, dist: Distribution, n: int,
                        k_inner: int, rep: int,
                        policy: SeedPolicy) -> OuterRecord:
    """Draw one outer X and k_inner inner (X', A) pairs; return the
    subset-reweighted statistics.

    The inner values, scaled by H_n / 2, are unbiased for E[T | X] and
    E[T' | X] because the kappa-weighted subset sum equals H_n times the
    expectation under the sampler's law.
    """
    if k_inner < 2:
        raise ValueError("k_inner must be >= 2 for the variance correction")
    x = sample_iid(dist, n, policy.stream(rep, ROLE_X))
    prime_stream = policy.stream(rep, ROLE_PRIME)
    subset_stream = policy.stream(rep, ROLE_SUBSET)
    sampler = SubsetSampler(n)
    half_h = 0.5 * sampler.harmonic
    f_x = f(x)

    t_raw = np.empty(k_inner)
    tp_raw = np.empty(k_inner)
    sizes = np.empty(k_inner)
    mixed_raw = np.empty(k_inner)
    d1_abs = np.empty(k_inner)
    third_all = 0.0
    sixth_all = 0.0
    for inner in range(k_inner):
        xp = sample_iid(dist, n, prime_stream)
        a = sampler.sample(subset_stream)
        outside = np.setdiff1d(np.arange(n), a, assume_unique=True)
        xa = substituted(x, xp, a)
        f_xa = f(xa)
        dj_x = f_x - _substitution_batch(f, x, xp, outside)
        dj_xa = f_xa - _substitution_batch(f, xa, xp, outside)
        t_raw[inner] = half_h * float(dj_x @ dj_xa)
        tp_raw[inner] = half_h * float(dj_x @ np.abs(dj_xa))
        mixed_raw[inner] = 2.0 * half_h * float(np.abs(dj_x**2 * dj_xa).sum())
        sizes[inner] = len(outside)
        if outside[0] == 0:
            d1 = dj_x[0]
        else:
            d1 = f_x - f(substituted(x, xp, [0]))
        d1_abs[inner] = abs(d1)
        if inner == 0 and not f.symmetric:
            dj_all = f_x - _substitution_batch(f, x, xp, np.arange(n))
            third_all = float(np.abs(dj_all) ** 3 @ np.ones(n))
            sixth_all = float((dj_all**6).sum())
    return OuterRecord(
        f_x=f_x, t_raw=t_raw, tp_raw=tp_raw, sizes=sizes,
        mixed_raw=mixed_raw, abs_d1=d1_abs,
        third_all_j=third_all, sixth_all_j=sixth_all,
    )


def sample_T_terms(f: Functional, dist: Distribution, n: int, k_inner: int,
                   stream: np.random.Generator) -> Tuple[float, float]:
    """Unbiased estimates of (E[T|X], E[T'|X]) for one freshly drawn X,
    with everything drawn from the one supplied stream."""
    if k_inner < 2:
        raise ValueError("k_inner must be >= 2")
    x = sample_iid(dist, n, stream)
    sampler = SubsetSampler(n)
    half_h = 0.5 * sampler.harmonic
    f_x = f(x)
    t_vals = np.empty(k_inner)
    tp_vals = np.empty(k_inner)
    for inner in range(k_inner):
        xp = sample_iid(dist, n, stream)
        a = sampler.sample(stream)
        outside = np.setdiff1d(np.arange(n), a, assume_unique=True)
        xa = substituted(x, xp, a)
        f_xa = f(xa)
        dj_x = f_x - _substitution_batch(f, x, xp, outside)
        dj_xa = f_xa - _substitution_batch(f, xa, xp, outside)
        t_vals[inner] = half_h * float(dj_x @ dj_xa)
        tp_vals[inner] = half_h * float(dj_x @ np.abs(dj_xa))
    return float(t_vals.mean()), float(tp_vals.mean())


def _size_control_coefficient(raw: np.ndarray, sizes: np.ndarray) -> float:
    """Pooled within-replication regression slope of the inner statistic on
    the subset size.

    The size's sampler expectation n / H_n is known exactly, so subtracting
    lambda * (size - n/H_n) keeps every inner value unbiased while removing
    the dominant size-dispersion component of the within-replication noise.
    """
    rc = raw - raw.mean(axis=1, keepdims=True)
    sc = sizes - sizes.mean(axis=1, keepdims=True)
    denom = float((sc * sc).sum())
    if denom <= 0:
        return 0.0
    return float((rc * sc).sum() / denom)


def _controlled_stats(raw: np.ndarray, sizes: np.ndarray, n: int,
                      harmonic: float):
    """Apply the size control variate; return per-outer means and within
    variances of the adjusted inner values, plus the coefficient."""
    lam = _size_control_coefficient(raw, sizes)
    adjusted = raw - lam * (sizes - n / harmonic)
    return (adjusted.mean(axis=1), adjusted.var(axis=1, ddof=1), lam)


def _nested_variance(means: np.ndarray, within_vars: np.ndarray,
                     k_inner: int) -> float:
    """ANOVA-corrected estimate of the variance of the conditional mean."""
    return float(np.var(means, ddof=1) - within_vars.mean() / k_inner)


def _bootstrap_se_nested(means: np.ndarray, within_vars: np.ndarray,
                         k_inner: int, n_boot: int,
                         stream: np.random.Generator) -> float:
    r = len(means)
    idx = stream.integers(0, r, size=(n_boot, r))
    m = means[idx]
    w = within_vars[idx]
    vals = np.var(m, axis=1, ddof=1) - w.mean(axis=1) / k_inner
    return float(np.std(vals, ddof=1))


def estimate_var_conditional(f: Functional, dist: Distribution, n: int,
                             outer: int, k_inner: int, which: str,
                             policy: SeedPolicy) -> Tuple[float, float]:
    """Nested estimator of Var(E[T|X]) or Var(E[T'|X]) with its bootstrap
    standard error.  `which` is "T" or "Tprime"."""
    if outer < 30:
        raise ValueError("outer must be >= 30")
    records = [sample_outer_record(f, dist, n, k_inner, rep, policy)
               for rep in range(outer)]
    sizes = np.array([r.sizes for r in records])
    if which == "T":
        raw = np.array([r.t_raw for r in records])
    elif which == "Tprime":
        raw = np.array([r.tp_raw for r in records])
    else:
        raise ValueError("which must be 'T' or 'Tprime'")
    harmonic = SubsetSampler(n).harmonic
    means, within, _ = _controlled_stats(raw, sizes, n, harmonic)
    value = _nested_variance(means, within, k_inner)
    se = _bootstrap_se_nested(means, within, k_inner, 200,
                              policy.stream(0, "bootstrap"))
    return value, se


@dataclass
class BoundReport:
    """Named terms of the abstract and geometric bounds with their errors.

    Variance estimates may come out slightly negative (nested estimator);
    the raw value is kept and a zero-clamped version is used in the
    assembled bounds.  Moment fields hold the raw sums over coordinates,
    without the sigma powers or constants.
    """

    n: int
    reps: int
    k_inner: int
    master_seed: int
    mean_hat: float = 0.0
    sigma2_hat: float = 0.0
    sigma2_se: float = 0.0
    e_t: float = 0.0
    e_t_se: float = 0.0
    var_ET_given_X: float = 0.0
    var_ET_given_X_se: float = 0.0
    var_ETprime_given_X: float = 0.0
    var_ETprime_given_X_se: float = 0.0
    third_moment_term: float = 0.0
    third_moment_se: float = 0.0
    mixed_term: float = 0.0
    mixed_term_se: float = 0.0
    sixth_moment_term: float = 0.0
    sixth_moment_se: float = 0.0
    kolmogorov_bound_intermed: float = 0.0
    kolmogorov_bound_loose: float = 0.0
    wasserstein_bound: float = 0.0
    empirical_dK: float = 0.0
    dkw_band: float = 0.0
    # geometric-bound extras (populated by geometric_bound only)
    b_n: Optional[float] = None
    b_n_se: Optional[float] = None
    b_n_prime: Optional[float] = None
    b_n_prime_se: Optional[float] = None
    delta1_fourth: Optional[float] = None
    sup_mixed: Optional[float] = None
    candidate_selectors: Optional[int] = None
    candidate_subsets: Optional[int] = None
    graph_bound: Optional[float] = None
    control_lambda_t: Optional[float] = None
    control_lambda_tprime: Optional[float] = None

    def to_dict(self) -> dict:
        out = {}
        for key, val in self.__dict__.items():
            if val is None:
                continue
            out[key] = val
        return out


def kolmogorov_bound(f: Functional, dist: Distribution, n: int,
                     config: BoundConfig) -> BoundReport:
    """Monte Carlo estimate of every term of both Kolmogorov bound forms,
    the Wasserstein bound, and the empirical Kolmogorov distance.

    Raises DegenerateVariance when the estimated variance of f(X) is within
    two standard errors of zero.
    """
    policy = config.policy
    records = [sample_outer_record(f, dist, n, config.k_inner, rep, policy)
               for rep in range(config.outer)]
    r = len(records)
    f_sample = np.array([rec.f_x for rec in records])
    mean_hat = float(f_sample.mean())
    sigma2 = float(np.var(f_sample, ddof=1))
    sigma2_se = _se_of_variance(f_sample)
    if sigma2 <= 2.0 * sigma2_se or sigma2 <= 0.0:
        raise DegenerateVariance(
            f"sigma^2 = {sigma2:.3g} within 2 se ({sigma2_se:.3g}) of zero")
    sigma = np.sqrt(sigma2)

    sizes = np.array([rec.sizes for rec in records])
    harmonic = SubsetSampler(n).harmonic
    t_means, t_within, lam_t = _controlled_stats(
        np.array([rec.t_raw for rec in records]), sizes, n, harmonic)
    tp_means, tp_within, lam_tp = _controlled_stats(
        np.array([rec.tp_raw for rec in records]), sizes, n, harmonic)
    boot = policy.stream(0, "bootstrap")
    var_t = _nested_variance(t_means, t_within, config.k_inner)
    var_t_se = _bootstrap_se_nested(t_means, t_within, config.k_inner,
                                    config.bootstrap, boot)
    var_tp = _nested_variance(tp_means, tp_within, config.k_inner)
    var_tp_se = _bootstrap_se_nested(tp_means, tp_within, config.k_inner,
                                     config.bootstrap, boot)

    centered = np.abs(f_sample - mean_hat)
    mixed_inner = np.array([rec.mixed_raw.mean() for rec in records])
    mixed_samples = centered * mixed_inner
    mixed = float(mixed_samples.mean())
    mixed_se = float(np.std(mixed_samples, ddof=1) / np.sqrt(r))

    if f.symmetric:
        third_samples = n * np.array([(rec.abs_d1**3).mean() for rec in records])
        sixth_raw = np.array([(rec.abs_d1**6).mean() for rec in records])
        m6 = float(sixth_raw.mean())
        m6_se = float(np.std(sixth_raw, ddof=1) / np.sqrt(r))
        sixth = n * np.sqrt(max(m6, 0.0))
        sixth_se = n * (0.5 * m6_se / np.sqrt(m6) if m6 > 0 else 0.0)
    else:
        third_samples = np.array([rec.third_all_j for rec in records])
        sixth_raw = np.array([rec.sixth_all_j for rec in records])
        # relax sum_j sqrt(E|.|^6) upward to sqrt(n * sum_j E|.|^6)
        m6 = float(sixth_raw.mean())
        m6_se = float(np.std(sixth_raw, ddof=1) / np.sqrt(r))
        sixth = np.sqrt(n) * np.sqrt(max(m6, 0.0))
        sixth_se = np.sqrt(n) * (0.5 * m6_se / np.sqrt(m6) if m6 > 0 else 0.0)
    third = float(third_samples.mean())
    third_se = float(np.std(third_samples, ddof=1) / np.sqrt(r))

    var_t_pos = max(var_t, 0.0)
    var_tp_pos = max(var_tp, 0.0)
    first_terms = (np.sqrt(var_t_pos) + np.sqrt(var_tp_pos)) / sigma2
    intermed = (first_terms + mixed / (4.0 * sigma2**2)
                + SQRT_2PI / 16.0 * third / sigma**3)
    loose = (first_terms + sixth / (4.0 * sigma**3)
             + SQRT_2PI / 16.0 * third / sigma**3)
    wasserstein = np.sqrt(var_t_pos) / sigma2 + third / (2.0 * sigma**3)

    std = (f_sample - mean_hat) / sigma
    d_k = empirical_kolmogorov_sorted(np.sort(std))

    return BoundReport(
        n=n, reps=r, k_inner=config.k_inner,
        master_seed=policy.master_seed,
        mean_hat=mean_hat,
        sigma2_hat=sigma2, sigma2_se=sigma2_se,
        e_t=float(t_means.mean()),
        e_t_se=float(np.std(t_means, ddof=1) / np.sqrt(r)),
        var_ET_given_X=var_t, var_ET_given_X_se=var_t_se,
        var_ETprime_given_X=var_tp, var_ETprime_given_X_se=var_tp_se,
        third_moment_term=third, third_moment_se=third_se,
        mixed_term=mixed, mixed_term_se=mixed_se,
        sixth_moment_term=float(sixth), sixth_moment_se=float(sixth_se),
        kolmogorov_bound_intermed=float(intermed),
        kolmogorov_bound_loose=float(loose),
        wasserstein_bound=float(wasserstein),
        empirical_dK=float(d_k),
        dkw_band=dkw_band(r, config.dkw_level),
        control_lambda_t=lam_t,
        control_lambda_tprime=lam_tp,
    )


def wasserstein_bound(f: Functional, dist: Distribution, n: int,
                      config: BoundConfig) -> float:
    """Wasserstein-distance bound; shares its first term with the
    Kolmogorov report."""
    return kolmogorov_bound(f, dist, n, config).wasserstein_bound


# --- geometric (recombination) bound ---------------------------------------


@dataclass
class GeometricBoundConfig:
    policy: SeedPolicy = field(default_factory=SeedPolicy)
    outer: int = 48
    n_random_selectors: int = 16
    n_subset_candidates: int = 8
    graph_constant: float = GRAPH_CONSTANT
    sigma2: Optional[float] = None
    sigma2_se: float = 0.0
    mean: Optional[float] = None
    dkw_level: float = 0.05


def _candidate_selectors(n: int, n_random: int,
                         stream: np.random.Generator) -> list:
    fixed = [
        np.full(n, BASE, dtype=np.int64),
        np.full(n, PRIME, dtype=np.int64),
        np.full(n, TILDE, dtype=np.int64),
        np.arange(n, dtype=np.int64) % 3,
        (2 - np.arange(n, dtype=np.int64)) % 3,
    ]
    randoms = [stream.integers(0, 3, size=n) for _ in range(n_random)]
    return fixed + randoms


def _candidate_subsets(n: int, count: int,
                       stream: np.random.Generator) -> list:
    fixed = [np.empty(0, dtype=np.int64), np.array([1]), np.arange(n)]
    sizes = [max(1, n // 4), max(1, n // 2), max(1, (3 * n) // 4), n - 1]
    out = list(fixed)
    for size in sizes:
        if len(out) >= count:
            break
        out.append(np.sort(stream.choice(n, size=size, replace=False)))
    while len(out) < count:
        size = int(stream.integers(1, n))
        out.append(np.sort(stream.choice(n, size=size, replace=False)))
    return out[:count]


def geometric_bound(f: Functional, dist: Distribution, n: int,
                    config: GeometricBoundConfig) -> BoundReport:
    """Recombination-supremum bound for symmetric functionals.

    The suprema over recombinations (and over substitution subsets in the
    mixed term) are approximated by maxima over a fixed candidate set, so the
    reported coefficients are lower-confidence estimates; the candidate
    counts are recorded in the report.  Second-order support indicators use
    exact zero testing, which is valid because the geometric functionals are
    grid-deterministic.
    """
    if not f.symmetric:
        raise AsymmetricFunctional(f"{f.name or '<anon>'} is not symmetric")
    if n < 3:
        raise ValueError("geometric bound needs n >= 3")
    policy = config.policy
    sel_stream = policy.stream(0, "selectors")
    selectors = _candidate_selectors(n, config.n_random_selectors, sel_stream)
    subsets = _candidate_subsets(n, config.n_subset_candidates, sel_stream)
    n_sel = len(selectors)
    n_sub = len(subsets)

    bn_sum = np.zeros((n_sel, n_sel))
    bn_sumsq = np.zeros((n_sel, n_sel))
    bpn_sum = np.zeros((n_sel, n_sel, n_sel))
    bpn_sumsq = np.zeros((n_sel, n_sel, n_sel))
    f_x_vals = np.empty(config.outer)
    d1_4_vals = np.empty(config.outer)
    d1_3_vals = np.empty(config.outer)
    d1a_cubes = np.empty((config.outer, n_sub))

    for rep in range(config.outer):
        x = sample_iid(dist, n, policy.stream(rep, ROLE_X))
        xp = sample_iid(dist, n, policy.stream(rep, ROLE_PRIME))
        xt = sample_iid(dist, n, policy.stream(rep, ROLE_TILDE))
        memo: dict = {}

        def phi(sel_id, replaced, base_cfg):
            key = (sel_id, replaced)
            if key not in memo:
                cfg = base_cfg
                if replaced:
                    cfg = substituted(base_cfg, xp, list(replaced))
                memo[key] = f(cfg)
            return memo[key]

        i12 = np.empty(n_sel)
        i13 = np.empty(n_sel)
        d1_4 = np.empty(n_sel)
        d2_4 = np.empty(n_sel)
        for c, sel in enumerate(selectors):
            y = recombine(x, xp, xt, sel)
            p0 = phi(c, (), y)
            p_1 = phi(c, (0,), y)
            p_2 = phi(c, (1,), y)
            p_3 = phi(c, (2,), y)
            p_12 = phi(c, (0, 1), y)
            p_13 = phi(c, (0, 2), y)
            i12[c] = 1.0 if (p0 - p_1 - p_2 + p_12) != 0.0 else 0.0
            i13[c] = 1.0 if (p0 - p_1 - p_3 + p_13) != 0.0 else 0.0
            d1_4[c] = (p0 - p_1) ** 4
            d2_4[c] = (p0 - p_2) ** 4
        bn_term = i12[:, None] * d1_4[None, :]
        bn_sum += bn_term
        bn_sumsq += bn_term**2
        bpn_term = i12[:, None, None] * i13[None, :, None] * d2_4[None, None, :]
        bpn_sum += bpn_term
        bpn_sumsq += bpn_term**2

        base_id = 0  # selector 0 is all-base, whose recombination equals x
        f_x = phi(base_id, (), x)
        d1 = f_x - phi(base_id, (0,), x)
        f_x_vals[rep] = f_x
        d1_4_vals[rep] = d1**4
        d1_3_vals[rep] = abs(d1) ** 3
        for s_i, a in enumerate(subsets):
            key_a = ("A", s_i)
            if key_a not in memo:
                memo[key_a] = f(substituted(x, xp, a))
            a_with = ("A1", s_i)
            if a_with not in memo:
                au = np.union1d(a, [0])
                memo[a_with] = f(substituted(x, xp, au))
            d1a_cubes[rep, s_i] = abs(memo[key_a] - memo[a_with]) ** 3

    r = config.outer
    mean_hat = config.mean if config.mean is not None else float(f_x_vals.mean())
    if config.sigma2 is not None:
        sigma2, sigma2_se = config.sigma2, config.sigma2_se
    else:
        sigma2 = float(np.var(f_x_vals, ddof=1))
        sigma2_se = _se_of_variance(f_x_vals)
    if sigma2 <= 0:
        raise DegenerateVariance("nonpositive variance for geometric bound")
    sigma = np.sqrt(sigma2)

    bn_mean = bn_sum / r
    bn_se = np.sqrt(np.maximum(bn_sumsq / r - bn_mean**2, 0.0) / max(r - 1, 1))
    flat = int(np.argmax(bn_mean))
    b_n = float(bn_mean.ravel()[flat])
    b_n_se = float(bn_se.ravel()[flat])
    bpn_mean = bpn_sum / r
    bpn_se = np.sqrt(np.maximum(bpn_sumsq / r - bpn_mean**2, 0.0) / max(r - 1, 1))
    flatp = int(np.argmax(bpn_mean))
    b_np = float(bpn_mean.ravel()[flatp])
    b_np_se = float(bpn_se.ravel()[flatp])

    delta1_fourth = float(d1_4_vals.mean())
    third = float(d1_3_vals.mean())
    third_se = float(np.std(d1_3_vals, ddof=1) / np.sqrt(r))
    mixed_per_a = (np.abs(f_x_vals - mean_hat)[:, None] * d1a_cubes).mean(axis=0)
    sup_mixed = float(mixed_per_a.max())

    term1 = (config.graph_constant * np.sqrt(n) / sigma2
             * (np.sqrt(n * b_n) + np.sqrt(n**2 * b_np)
                + np.sqrt(delta1_fourth)))
    term2 = n / (4.0 * sigma2**2) * sup_mixed
    term3 = SQRT_2PI / 16.0 * n * third / sigma**3

    std = np.sort((f_x_vals - f_x_vals.mean()) / np.std(f_x_vals, ddof=1))
    d_k = empirical_kolmogorov_sorted(std) if r >= 100 else 0.0

    return BoundReport(
        n=n, reps=r, k_inner=0, master_seed=policy.master_seed,
        mean_hat=mean_hat,
        sigma2_hat=sigma2, sigma2_se=sigma2_se,
        third_moment_term=n * third, third_moment_se=n * third_se,
        empirical_dK=d_k, dkw_band=dkw_band(r, config.dkw_level),
        b_n=b_n, b_n_se=b_n_se,
        b_n_prime=b_np, b_n_prime_se=b_np_se,
        delta1_fourth=delta1_fourth,
        sup_mixed=sup_mixed,
        candidate_selectors=n_sel,
        candidate_subsets=n_sub,
        graph_bound=float(term1 + term2 + term3),
    )


# --- deletion-moment inequality --------------------------------------------


def moment_constant(q: float) -> float:
    """Constant of the deletion-moment inequality; the q = 2 case uses the
    sharper exchangeable-pair constant 1/2, and q below 2 is rejected
    because the conjugate-exponent form degenerates there."""
    if q == 2:
        return 0.5
    if q < 2:
        raise ValueError("moment inequality implemented for q >= 2")
    qp = q / (q - 1.0)
    return 2.0**q * (18.0 * np.sqrt(q) * qp) ** qp


@dataclass
class MomentCheckResult:
    q: float
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    constant: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 3.0 * np.sqrt(self.lhs_se**2 + self.rhs_se**2)


def moment_bound_check(f: Functional, dist: Distribution, n: int, q: float,
                       config: BoundConfig) -> MomentCheckResult:
    """Centred q-th moment of f against the deletion/resampling bound.

    For q = 2 the right side is the exchangeable-pair form
    (n/2) E |Delta_1 f|^2 with Delta_1 computed through the two deletion
    paths; for q > 2 it is n^{q/2} c_q E |D_1 f|^q.
    """
    if f.arity is not None:
        raise FixedArityFunctional("moment check needs a variable-length functional")
    policy = config.policy
    f_vals = np.empty(config.outer)
    incr = np.empty(config.outer)
    for rep in range(config.outer):
        x = sample_iid(dist, n, policy.stream(rep, ROLE_X))
        f_vals[rep] = f(x)
        if q == 2:
            xp = sample_iid(dist, n, policy.stream(rep, ROLE_PRIME))
            # Delta_1 f = D_1 f(X) - D_1 f(X^1); the deleted configuration
            # cancels, leaving the direct resampling difference
            x1 = np.array(x, copy=True)
            x1[0] = xp[0]
            incr[rep] = f_vals[rep] - f(x1)
        else:
            incr[rep] = f_vals[rep] - f(deleted(x, [0]))
    mean_hat = f_vals.mean()
    lhs_samples = np.abs(f_vals - mean_hat) ** q
    lhs = float(lhs_samples.mean())
    lhs_se = float(np.std(lhs_samples, ddof=1) / np.sqrt(config.outer))
    c_q = moment_constant(q)
    rhs_samples = n ** (q / 2.0) * c_q * np.abs(incr) ** q
    rhs = float(rhs_samples.mean())
    rhs_se = float(np.std(rhs_samples, ddof=1) / np.sqrt(config.outer))
    return MomentCheckResult(q=q, lhs=lhs, lhs_se=lhs_se, rhs=rhs,
                             rhs_se=rhs_se, constant=c_q)


# --- Monte Carlo variance sandwich ------------------------------------------


def variance_lower_bound_mc(f: Functional, dist: Distribution, n: int,
                            outer: int, k_inner: int,
                            policy: SeedPolicy) -> Tuple[float, float]:
    """Sum over coordinates of E[(E[Delta_i f(X', X) | X])^2], by nested
    sampling with the squared-mean bias correction; symmetric functionals
    use n times the first coordinate."""
    if not f.symmetric:
        raise AsymmetricFunctional("MC lower bound implemented for symmetric f")
    vals = np.empty(outer)
    for rep in range(outer):
        x = sample_iid(dist, n, policy.stream(rep, ROLE_X))
        prime = policy.stream(rep, ROLE_PRIME)
        g_vals = np.empty(k_inner)
        for inner in range(k_inner):
            xp = sample_iid(dist, n, prime)
            xp1 = np.array(xp, copy=True)
            xp1[0] = x[0]
            g_vals[inner] = f(xp) - f(xp1)
        m = g_vals.mean()
        s2 = np.var(g_vals, ddof=1)
        vals[rep] = m * m - s2 / k_inner
    value = n * float(vals.mean())
    se = n * float(np.std(vals, ddof=1) / np.sqrt(outer))
    return value, se


def efron_stein_upper_mc(f: Functional, dist: Distribution, n: int,
                         outer: int, policy: SeedPolicy) -> Tuple[float, float]:
    """Half the summed mean squared resampling differences; n/2 times the
    first-coordinate term for symmetric functionals."""
    if not f.symmetric:
        raise AsymmetricFunctional("MC upper bound implemented for symmetric f")
    vals = np.empty(outer)
    for rep in range(outer):
        x = sample_iid(dist, n, policy.stream(rep, ROLE_X))
        xp = sample_iid(dist, n, policy.stream(rep, ROLE_PRIME))
        x1 = np.array(x, copy=True)
        x1[0] = xp[0]
        vals[rep] = (f(x) - f(x1)) ** 2
    value = 0.5 * n * float(vals.mean())
    se = 0.5 * n * float(np.std(vals, ddof=1) / np.sqrt(outer))
    return value, se
