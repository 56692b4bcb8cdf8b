import numpy as np
import pytest

from steinbounds.core import SeedPolicy, alphabet, table_functional, value_table
from steinbounds.functionals import sum_functional
from steinbounds.hoeffding import (
    covariance_identity_residual,
    decompose,
    decompose_table,
    degeneracy_residual,
    delta_j_cross_expectation,
    direct_variance,
    efron_stein_upper_exact,
    exact_t_expectation,
    harmonic_number,
    hoeffding_kernel,
    kappa,
    kappa_total,
    orthogonality_matrix,
    reconstruction_residual,
    variance_expansion,
    variance_lower_bound_exact,
)

BITS = alphabet((0.0, 1.0))
PM1 = alphabet((-1.0, 1.0))


def test_kappa_identities():
    from math import comb

    for n in range(1, 11):
        assert abs(kappa_total(n) - harmonic_number(n)) < 1e-12
        # row identity: strict subsets avoiding any fixed coordinate
        row = sum(comb(n - 1, a) * kappa(n, a) for a in range(n))
        assert abs(row - 1.0) < 1e-12


def test_singleton_kernel_of_sum_is_centered_value():
    f = sum_functional(BITS)
    kern = hoeffding_kernel(f, BITS, (0,), n=2)
    # phi_0(x) = x - 1/2 on fair bits
    assert np.allclose(kern.table, np.array([-0.5, 0.5]))
    pair = hoeffding_kernel(f, BITS, (0, 1), n=2)
    assert np.allclose(pair.table, 0.0)


def test_product_kernel_on_pm1():
    table = np.array([[1.0, -1.0], [-1.0, 1.0]])  # x1 * x2 with symbols -1, 1
    kern = hoeffding_kernel(table_functional(table), PM1, (0, 1))
    assert np.allclose(kern.table, table)
    single = hoeffding_kernel(table_functional(table), PM1, (0,))
    assert np.allclose(single.table, 0.0)


def test_decompose_constant_and_sum():
    const = decompose_table(np.full((2, 2, 2), 3.25), BITS.weights)
    assert const.mean == 3.25
    assert all(np.allclose(k.table, 0) for k in const.kernels.values())

    f = sum_functional(BITS)
    rep = decompose(f, BITS, n=3)
    for key, kern in rep.kernels.items():
        if len(key) > 1:
            assert np.allclose(kern.table, 0.0)
        else:
            assert np.allclose(kern.table, np.array([-0.5, 0.5]))


def test_reconstruction_degeneracy_orthogonality_random():
    stream = SeedPolicy(8).stream(0)
    dist = alphabet((0, 1, 2), np.array([0.5, 0.2, 0.3]))
    table = stream.random((3, 3, 3))
    rep = decompose_table(table, dist.weights)
    assert reconstruction_residual(rep) < 1e-10
    assert degeneracy_residual(rep) < 1e-10
    keys, mat = orthogonality_matrix(rep)
    off = mat - np.diag(np.diag(mat))
    assert np.abs(off).max() < 1e-12
    for i, key in enumerate(keys):
        assert abs(mat[i, i] - rep.per_kernel_second_moment[key]) < 1e-12


def test_variance_expansion_examples():
    # sum of k fair +-1 coordinates has variance k
    for k in (2, 4):
        table = value_table(sum_functional(PM1), PM1, k)
        rep = decompose_table(table, PM1.weights)
        assert abs(variance_expansion(rep) - k) < 1e-10
    prod = np.array([[1.0, -1.0], [-1.0, 1.0]])
    rep = decompose_table(prod, PM1.weights)
    assert abs(variance_expansion(rep) - 1.0) < 1e-10
    const = decompose_table(np.zeros((2, 2)), PM1.weights)
    assert variance_expansion(const) == 0.0


def test_variance_sandwich_exact():
    # independent sum: lower and upper coincide with the variance
    table = value_table(sum_functional(PM1), PM1, 4)
    lower = variance_lower_bound_exact(table, PM1.weights)
    upper = efron_stein_upper_exact(table, PM1.weights)
    assert abs(lower - 4.0) < 1e-10
    assert abs(upper - 4.0) < 1e-10
    # pure interaction: lower collapses to zero while the variance is 1; the
    # upper side enumerates to 2 (each resampled square has mean 2)
    prod = np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert abs(variance_lower_bound_exact(prod, PM1.weights)) < 1e-12
    assert abs(efron_stein_upper_exact(prod, PM1.weights) - 2.0) < 1e-12
    assert abs(direct_variance(prod, PM1.weights) - 1.0) < 1e-12
    # constant
    zero = np.zeros((2, 2))
    assert variance_lower_bound_exact(zero, PM1.weights) == 0.0
    assert efron_stein_upper_exact(zero, PM1.weights) == 0.0


def test_variance_sandwich_random_functionals():
    stream = SeedPolicy(9).stream(0)
    for _ in range(50):
        table = stream.random((2, 2, 2)) * 3 - 1
        var = direct_variance(table, BITS.weights)
        lower = variance_lower_bound_exact(table, BITS.weights)
        upper = efron_stein_upper_exact(table, BITS.weights)
        assert lower <= var + 1e-10
        assert var <= upper + 1e-10


def test_covariance_identity_sum_n2():
    table = value_table(sum_functional(BITS), BITS, 2)
    # Var(x1 + x2) on fair bits is 1/2, and the interpolation side matches
    assert abs(direct_variance(table, BITS.weights) - 0.5) < 1e-12
    assert covariance_identity_residual(table, table, BITS.weights) < 1e-12
    const = np.zeros((2, 2))
    assert covariance_identity_residual(const, table, BITS.weights) < 1e-12


def test_covariance_identity_random_pairs():
    stream = SeedPolicy(10).stream(0)
    for _ in range(20):
        f = stream.random((2, 2, 2))
        g = stream.random((2, 2, 2))
        assert covariance_identity_residual(f, g, BITS.weights) < 1e-10


def test_delta_cross_requires_j_outside():
    table = np.zeros((2, 2))
    with pytest.raises(ValueError):
        delta_j_cross_expectation(table, table, BITS.weights, 0, (0,))


def test_exact_t_expectation_equals_variance():
    stream = SeedPolicy(11).stream(0)
    dist = alphabet((0, 1), np.array([0.3, 0.7]))
    for shape in ((2, 2, 2), (2, 2, 2, 2)):
        table = stream.random(shape)
        et = exact_t_expectation(table, dist.weights)
        assert abs(et - direct_variance(table, dist.weights)) < 1e-10
