import itertools

import numpy as np
import pytest

from steinbounds.core import Functional, SeedPolicy, table_functional
from steinbounds.diffops import (
    BASE,
    PRIME,
    TILDE,
    delete,
    delete2,
    delta,
    delta_iterated,
    delta_iterated_inclusion_exclusion,
    recombine,
    substitute,
    substituted,
    telescoping_residual,
)
from steinbounds.errors import (
    ArityMismatch,
    ArityTooLarge,
    DuplicateIndex,
    FixedArityFunctional,
    IndexOutOfRange,
    LengthMismatch,
)

f_sum = Functional(evaluate=lambda x: float(np.sum(x)), arity=None,
                   symmetric=True, name="sum")


def test_substitute_examples():
    y = np.array([1.0, 2.0, 3.0, 4.0])
    yp = np.array([10.0, 20.0, 30.0, 40.0])
    assert substitute(f_sum, y, yp, [0, 3]) == 55.0
    assert substitute(f_sum, y, yp, []) == 10.0
    assert substitute(f_sum, y, yp, range(4)) == 100.0


def test_substitute_errors():
    y = np.array([1.0, 2.0])
    with pytest.raises(ArityMismatch):
        substitute(f_sum, y, np.array([1.0]), [0])
    with pytest.raises(IndexOutOfRange):
        substitute(f_sum, y, y, [5])
    with pytest.raises(DuplicateIndex):
        delta_iterated(f_sum, y, y, [0, 0])


def test_delta_examples():
    y = np.array([1.0, 2.0, 3.0, 4.0])
    yp = np.array([10.0, 20.0, 30.0, 40.0])
    assert delta(f_sum, y, yp, [0]) == -9.0
    assert delta(f_sum, y, y, [0, 2]) == 0.0
    assert delta(f_sum, y, yp, []) == 0.0


def test_delta_iterated_product_example():
    f = Functional(evaluate=lambda x: float(x[0] * x[1]), arity=2)
    y = np.array([1.0, 2.0])
    yp = np.array([3.0, 5.0])
    # alternating sum over substitution subsets: 15 - 6 - 5 + 2
    assert delta_iterated(f, y, yp, [0, 1]) == 6.0
    assert delta_iterated(f, y, y, [0, 1]) == 0.0
    assert delta_iterated(f, y, yp, [0]) == delta(f, y, yp, [0])


def test_delta_iterated_order_invariance_and_cross_check():
    stream = SeedPolicy(2).stream(0)
    table = stream.random((2,) * 5)
    f = table_functional(table)
    y = stream.integers(0, 2, 5)
    yp = stream.integers(0, 2, 5)
    for k in range(1, 5):
        indices = list(range(k))
        base = delta_iterated(f, y, yp, indices)
        for perm in itertools.permutations(indices):
            assert delta_iterated(f, y, yp, perm) == base
        ie = delta_iterated_inclusion_exclusion(f, y, yp, indices)
        assert abs(base - ie) < 1e-12


def test_telescoping_identity():
    stream = SeedPolicy(3).stream(0)
    # linear functional: identically zero residual
    y = stream.random(3)
    yp = stream.random(3)
    assert telescoping_residual(f_sum, y, yp) < 1e-12
    assert telescoping_residual(f_sum, y, y) == 0.0
    # random lookup tables on {0,1}^4
    for _ in range(10):
        f = table_functional(stream.random((2,) * 4))
        a = stream.integers(0, 2, 4)
        b = stream.integers(0, 2, 4)
        assert telescoping_residual(f, a, b) < 1e-12
    with pytest.raises(ArityTooLarge):
        telescoping_residual(f_sum, np.zeros(13), np.ones(13))


def test_deletion_operators():
    count = Functional(evaluate=lambda x: float(len(x)), arity=None)
    y = np.array([3.0, 1.0, 2.0])
    assert delete(count, y, 0) == 1.0
    assert delete2(f_sum, y, 0, 2) == 0.0
    f_max = Functional(evaluate=lambda x: float(np.max(x)), arity=None)
    assert delete(f_max, y, 0) == 1.0
    fixed = Functional(evaluate=lambda x: 0.0, arity=3)
    with pytest.raises(FixedArityFunctional):
        delete(fixed, y, 0)
    with pytest.raises(IndexOutOfRange):
        delete(count, y, 7)
    with pytest.raises(DuplicateIndex):
        delete2(count, y, 1, 1)


def test_recombination():
    x = np.array([1.0, 2.0, 3.0])
    xp = np.array([10.0, 20.0, 30.0])
    xt = np.array([100.0, 200.0, 300.0])
    assert np.array_equal(recombine(x, xp, xt, [BASE] * 3), x)
    assert np.array_equal(recombine(x, xp, xt, [PRIME] * 3), xp)
    mixed = recombine(x, xp, xt, [BASE, PRIME, TILDE])
    assert np.array_equal(mixed, [1.0, 20.0, 300.0])
    with pytest.raises(LengthMismatch):
        recombine(x, xp, xt[:2], [BASE] * 3)
    # points in the plane recombine row-wise
    pts = np.arange(6.0).reshape(3, 2)
    out = recombine(pts, pts + 10, pts + 20, [TILDE, BASE, PRIME])
    assert np.array_equal(out, np.array([[20.0, 21.0], [2.0, 3.0], [14.0, 15.0]]))


def test_resampling_deletion_relations():
    """First-order resampling differences decompose through deletions, and the
    second-order relation ties the two operator families together."""
    stream = SeedPolicy(4).stream(0)

    def weird(x):
        x = np.asarray(x, dtype=float)
        return float(np.sum(np.sin(3 * x)) + np.prod(np.cos(x[:2])) * len(x))

    f = Functional(evaluate=weird, arity=None)
    for _ in range(25):
        n = 5
        x = stream.random(n)
        xp = stream.random(n)
        i, j = 1, 3
        x_i = substituted(x, xp, [i])
        x_j = substituted(x, xp, [j])
        x_ij = substituted(x, xp, [i, j])
        # |Delta_i f| <= |D_i f(X)| + |D_i f(X^i)| holds exactly (identity
        # up to a shared deleted term)
        delta_i = delta(f, x, xp, [i])
        d_i_x = delete(f, x, i)
        d_i_xi = delete(f, x_i, i)
        assert abs(delta_i - (d_i_x - d_i_xi)) < 1e-12
        assert abs(delta_i) <= abs(d_i_x) + abs(d_i_xi) + 1e-12
        # second-order: iterated difference equals the deletion square
        lhs = delta_iterated(f, x, xp, [i, j])
        rhs = (delete2(f, x, i, j) - delete2(f, x_i, i, j)
               - delete2(f, x_j, i, j) + delete2(f, x_ij, i, j))
        assert abs(lhs - rhs) < 1e-10
