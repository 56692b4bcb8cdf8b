import itertools

import numpy as np
import pytest
from scipy.stats import chisquare

from steinbounds.bounds import (
    BoundConfig,
    GeometricBoundConfig,
    SubsetSampler,
    efron_stein_upper_mc,
    estimate_var_conditional,
    geometric_bound,
    kolmogorov_bound,
    moment_bound_check,
    moment_constant,
    sample_T_terms,
    variance_lower_bound_mc,
    wasserstein_bound,
)
from steinbounds.core import Functional, SeedPolicy, alphabet, value_table
from steinbounds.diffops import recombine, substituted
from steinbounds.errors import (
    AsymmetricFunctional,
    DegenerateVariance,
    FixedArityFunctional,
)
from steinbounds.functionals import pair_product_functional, sum_functional
from steinbounds.hoeffding import (
    direct_variance,
    exact_t_expectation,
    harmonic_number,
    kappa,
)

PM1 = alphabet((-1.0, 1.0))
BITS = alphabet((0.0, 1.0))
POLICY = SeedPolicy(17)
F_SUM = sum_functional(PM1)
F_CONST = Functional(evaluate=lambda x: 2.0, arity=None, symmetric=True,
                     name="const")


def test_subset_sampler_strict_and_marginal():
    n = 6
    sampler = SubsetSampler(n)
    stream = POLICY.stream(0, "subset-sampler")
    counts = np.zeros(n)
    for _ in range(4000):
        a = sampler.sample(stream)
        assert len(a) < n
        assert len(np.unique(a)) == len(a)
        counts[len(a)] += 1
    expected = sampler.size_probabilities() * 4000
    stat = chisquare(counts, expected)
    assert stat.pvalue > 1e-4
    assert abs(sampler.harmonic - harmonic_number(n)) < 1e-15


def test_sample_t_terms_degenerate_and_sum():
    # constant functional: both statistics vanish
    t, tp = sample_T_terms(F_CONST, PM1, 4, 4, POLICY.stream(1, "X"))
    assert t == 0.0 and tp == 0.0
    # n = 1 sum on bits: T is (X - X')^2 / 2, i.e. 0 or 1/2
    fb = sum_functional(BITS)
    stream = POLICY.stream(2, "X")
    vals = {sample_T_terms(fb, BITS, 1, 2, stream)[0] for _ in range(40)}
    assert vals <= {0.0, 0.25, 0.5}  # inner means average two draws


def test_expected_t_matches_variance():
    # E[T] = Var f for the 5-bit sum (exact variance 5)
    records_mean = []
    cfg = BoundConfig(policy=POLICY.child("et"), outer=400, k_inner=8)
    rep = kolmogorov_bound(F_SUM, PM1, 5, cfg)
    assert abs(rep.e_t - 5.0) <= 3 * rep.e_t_se + 1e-9
    assert abs(rep.sigma2_hat - 5.0) <= 3 * rep.sigma2_se


def test_estimate_var_conditional_sum_is_zero():
    val, se = estimate_var_conditional(F_SUM, PM1, 8, 200, 8, "T",
                                       POLICY.child("vc"))
    assert abs(val) <= 3 * se + 1e-9
    with pytest.raises(ValueError):
        estimate_var_conditional(F_SUM, PM1, 8, 10, 8, "T", POLICY)
    with pytest.raises(ValueError):
        estimate_var_conditional(F_SUM, PM1, 8, 50, 8, "bogus", POLICY)


def exact_var_conditional_t(table, weights):
    """Brute-force Var(E[T|X]) by enumerating (X, X', A)."""
    n = table.ndim
    k = len(weights)
    probs = {}
    configs = list(itertools.product(range(k), repeat=n))
    t_given_x = np.zeros(len(configs))
    px = np.zeros(len(configs))
    for xi, x in enumerate(configs):
        px[xi] = np.prod([weights[v] for v in x])
        acc = 0.0
        for xpi, xp in enumerate(configs):
            pxp = np.prod([weights[v] for v in xp])
            for size in range(n):
                ka = kappa(n, size)
                for a in itertools.combinations(range(n), size):
                    for j in range(n):
                        if j in a:
                            continue
                        xa = list(x)
                        for i in a:
                            xa[i] = xp[i]
                        xaj = list(xa)
                        xaj[j] = xp[j]
                        xj = list(x)
                        xj[j] = xp[j]
                        dj_x = table[tuple(x)] - table[tuple(xj)]
                        dj_xa = table[tuple(xa)] - table[tuple(xaj)]
                        acc += pxp * 0.5 * ka * dj_x * dj_xa
        t_given_x[xi] = acc
    mean = float(px @ t_given_x)
    return float(px @ (t_given_x - mean) ** 2)


def test_var_conditional_against_enumeration():
    # pure interaction on two fair signs: E[T|X] is constant, variance zero
    table = value_table(pair_product_functional(PM1), PM1, 2)
    exact = exact_var_conditional_t(table, PM1.weights)
    assert abs(exact) < 1e-12
    f = pair_product_functional(PM1)
    val, se = estimate_var_conditional(f, PM1, 2, 300, 8, "T",
                                       POLICY.child("enum"))
    assert abs(val - exact) <= 3 * se + 1e-9


def test_sampler_reweighting_matches_enumeration():
    """H_n-reweighted Monte Carlo T agrees with the exact kappa-weighted
    subset sum, and both equal the variance."""
    n = 6
    dist = alphabet((0.0, 1.0), np.array([0.35, 0.65]))
    f = sum_functional(dist)
    table = value_table(f, dist, n)
    exact = exact_t_expectation(table, dist.weights)
    assert abs(exact - direct_variance(table, dist.weights)) < 1e-10
    cfg = BoundConfig(policy=POLICY.child("rw"), outer=500, k_inner=8)
    rep = kolmogorov_bound(f, dist, n, cfg)
    assert abs(rep.e_t - exact) <= 3 * rep.e_t_se


def test_kolmogorov_bound_report_sanity():
    cfg = BoundConfig(policy=POLICY.child("kb"), outer=300, k_inner=8)
    rep = kolmogorov_bound(F_SUM, PM1, 64, cfg)
    assert rep.empirical_dK <= rep.kolmogorov_bound_intermed + 0.1
    combined_se = rep.mixed_term_se / (4 * rep.sigma2_hat**2) + \
        rep.sixth_moment_se / (4 * rep.sigma2_hat**1.5)
    assert rep.kolmogorov_bound_loose >= rep.kolmogorov_bound_intermed - 2 * combined_se
    assert rep.var_ET_given_X >= -2 * rep.var_ET_given_X_se
    assert rep.wasserstein_bound <= rep.kolmogorov_bound_intermed + 1e-12
    # wasserstein shares the first-term estimate with the report
    assert abs(rep.wasserstein_bound
               - (np.sqrt(max(rep.var_ET_given_X, 0.0)) / rep.sigma2_hat
                  + rep.third_moment_term / (2 * rep.sigma2_hat**1.5))) < 1e-12


def test_degenerate_variance_raises():
    cfg = BoundConfig(policy=POLICY.child("dg"), outer=120, k_inner=4)
    with pytest.raises(DegenerateVariance):
        kolmogorov_bound(F_CONST, PM1, 4, cfg)
    with pytest.raises(DegenerateVariance):
        wasserstein_bound(F_CONST, PM1, 4, cfg)


def test_symmetric_shortcut_matches_full_sum():
    """n-times-first-coordinate third moment agrees with the explicit
    all-coordinates sum for an asymmetric copy of a symmetric functional."""
    asym = Functional(evaluate=F_SUM.evaluate, evaluate_batch=F_SUM.evaluate_batch,
                      arity=None, symmetric=False, name="sum-asym")
    cfg = BoundConfig(policy=POLICY.child("sh"), outer=250, k_inner=8)
    rep_sym = kolmogorov_bound(F_SUM, PM1, 6, cfg)
    rep_asym = kolmogorov_bound(asym, PM1, 6, cfg)
    se = 3 * (rep_sym.third_moment_se + rep_asym.third_moment_se)
    assert abs(rep_sym.third_moment_term - rep_asym.third_moment_term) <= se + 1e-9


def test_geometric_bound_sum_has_no_interactions():
    cfg = GeometricBoundConfig(policy=POLICY.child("gs"), outer=80,
                               n_random_selectors=4, n_subset_candidates=3)
    rep = geometric_bound(F_SUM, PM1, 5, cfg)
    assert rep.b_n == 0.0
    assert rep.b_n_prime == 0.0
    assert rep.graph_bound > 0.0


def exact_candidate_pair_values(n, selectors):
    """Enumerate (X, X', Xt) on fair signs and return the exact per-pair
    means of the second-order support times fourth-power difference."""
    f = pair_product_functional(PM1)
    vals = np.array([-1.0, 1.0])
    n_sel = len(selectors)
    bn = np.zeros((n_sel, n_sel))
    count = 0
    for xs in itertools.product(range(2), repeat=3 * n):
        x = np.array(xs[:n])
        xp = np.array(xs[n:2 * n])
        xt = np.array(xs[2 * n:])
        i12 = np.empty(n_sel)
        d1_4 = np.empty(n_sel)
        for c, sel in enumerate(selectors):
            y = recombine(x, xp, xt, sel)
            p0 = f(y)
            p1 = f(substituted(y, xp, [0]))
            p2 = f(substituted(y, xp, [1]))
            p12 = f(substituted(y, xp, [0, 1]))
            i12[c] = 1.0 if (p0 - p1 - p2 + p12) != 0.0 else 0.0
            d1_4[c] = (p0 - p1) ** 4
        bn += i12[:, None] * d1_4[None, :]
        count += 1
    return bn / count


def test_geometric_bound_pairprod_against_enumeration():
    n = 4
    f = pair_product_functional(PM1)
    cfg = GeometricBoundConfig(policy=POLICY.child("gp"), outer=500,
                               n_random_selectors=0, n_subset_candidates=3)
    rep = geometric_bound(f, PM1, n, cfg)
    from steinbounds.bounds import _candidate_selectors
    selectors = _candidate_selectors(n, 0, POLICY.child("gp").stream(0, "selectors"))
    exact = exact_candidate_pair_values(n, selectors)
    assert rep.b_n > 0
    assert abs(rep.b_n - exact.max()) <= 3 * rep.b_n_se
    with pytest.raises(AsymmetricFunctional):
        geometric_bound(Functional(evaluate=lambda x: float(x[0])), PM1, 4, cfg)


def test_moment_bound_check():
    cfg = BoundConfig(policy=POLICY.child("mb"), outer=400)
    const = moment_bound_check(F_CONST, PM1, 6, 2, cfg)
    assert const.lhs == 0.0 and const.holds
    for q in (2, 3):
        res = moment_bound_check(F_SUM, PM1, 10, q, cfg)
        assert res.holds, (q, res)
    assert moment_constant(2) == 0.5
    assert moment_constant(3) == pytest.approx(8 * (18 * np.sqrt(3) * 1.5) ** 1.5)
    fixed = Functional(evaluate=lambda x: 0.0, arity=6)
    with pytest.raises(FixedArityFunctional):
        moment_bound_check(fixed, PM1, 6, 2, cfg)


def test_variance_sandwich_mc_sum():
    # for the independent sum both Monte Carlo bounds equal the variance n
    n = 8
    pol = POLICY.child("vs")
    lower, lo_se = variance_lower_bound_mc(F_SUM, PM1, n, 300, 8, pol)
    upper, up_se = efron_stein_upper_mc(F_SUM, PM1, n, 400, pol)
    assert abs(lower - n) <= 3 * lo_se
    assert abs(upper - n) <= 3 * up_se
    with pytest.raises(AsymmetricFunctional):
        variance_lower_bound_mc(Functional(evaluate=lambda x: float(x[0])),
                                PM1, 4, 50, 4, pol)
