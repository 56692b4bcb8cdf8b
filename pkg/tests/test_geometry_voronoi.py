import numpy as np
import pytest

from steinbounds.core import SeedPolicy, check_symmetry
from steinbounds.errors import EmptyConfiguration
from steinbounds.geometry import (
    Ball,
    HalfInterval,
    add_one_decomposition_check,
    assign_nearest,
    boundary_band_volume,
    make_grid,
    max_cell_radius,
    max_cell_radius_event,
    rolling_ball_integral,
    unit_ball_volume,
    voronoi_deletion_profile,
    voronoi_deletion_support,
    voronoi_functional,
    voronoi_radii,
    voronoi_volume,
    voronoi_volume_exact_1d,
)
from steinbounds.geometry.voronoi import rho_threshold

POLICY = SeedPolicy(21)


def grid_for(d, m, rep=0, extent=1.0):
    return make_grid(d, m, POLICY.stream(rep, "integration"), extent=extent)


def test_exact_1d_midpoint_example():
    x = np.array([[0.25], [0.75]])
    assert voronoi_volume_exact_1d([(0.0, 0.5)], x) == 0.5
    assert voronoi_volume_exact_1d([(0.0, 0.5)], np.array([[0.3]])) == 1.0


def test_exact_1d_vs_grid_within_two_strata():
    # an interval target yields at most two straddling strata, so the grid
    # estimator sits within 2/m of the exact value, always
    grid = grid_for(1, 100000)
    stream = POLICY.stream(1, "X")
    for _ in range(10):
        x = stream.random((20, 1))
        a = stream.uniform(0, 0.5)
        b = a + stream.uniform(0.1, 0.5)
        shape = HalfInterval(b) if a == 0.0 else None
        intervals = [(a, min(b, 1.0))]

        class IntervalShape:
            d = 1
            kind = "interval"

            def contains(self, pts):
                return (pts[:, 0] >= a) & (pts[:, 0] <= min(b, 1.0))

        exact = voronoi_volume_exact_1d(intervals, x)
        approx = voronoi_volume(IntervalShape(), x, grid)
        assert abs(exact - approx) <= 2.0 / grid.m


def test_phi_range_and_all_inside():
    grid = grid_for(2, 5000)
    ball = Ball((0.5, 0.5), 10.0)  # whole cube inside
    x = POLICY.stream(2, "X").random((30, 2))
    assert voronoi_volume(ball, x, grid) == 1.0
    small = Ball((0.5, 0.5), 0.3)
    v = voronoi_volume(small, x, grid)
    assert 0.0 <= v <= 1.0
    with pytest.raises(EmptyConfiguration):
        voronoi_volume(small, np.empty((0, 2)), grid)


def test_voronoi_functional_symmetric_flag():
    grid = grid_for(2, 4000)
    f = voronoi_functional(Ball((0.5, 0.5), 0.3), grid)
    stream = POLICY.stream(3, "X")
    x = stream.random((25, 2))
    assert check_symmetry(f, x, stream)


def test_deletion_profile_matches_direct_reevaluation():
    grid = grid_for(2, 20000)
    ball = Ball((0.5, 0.5), 0.3)
    x = POLICY.stream(4, "X").random((40, 2))
    prof = voronoi_deletion_profile(ball, x, grid)
    stream = POLICY.stream(5, "X")
    for _ in range(8):
        i, j = stream.choice(40, size=2, replace=False)
        rep = voronoi_deletion_support(ball, x, grid, int(i), int(j))
        assert abs(prof.d_i(int(i)) - rep.d_i) < 1e-14
        assert abs(prof.d_ij(int(i), int(j)) - rep.d_ij) < 1e-14


def test_proposition_support_properties():
    """Interior points with same-side neighborhoods have vanishing first-order
    deletions; second-order deletions vanish beyond graph distance two."""
    grid = grid_for(2, 20000)
    ball = Ball((0.5, 0.5), 0.3)
    x = POLICY.stream(6, "X").random((50, 2))
    prof = voronoi_deletion_profile(ball, x, grid)
    support = prof.all_dij_support()
    for i in range(50):
        nbrs = prof.neighbors(i)
        if nbrs and all(prof.in_k[v] == prof.in_k[i] for v in nbrs):
            assert prof.d_i(i) == 0.0
    hops_cache = {}
    for i in range(50):
        for j in range(i + 1, 50):
            if i not in hops_cache:
                from steinbounds.geometry.voronoi import _graph_distances
                hops_cache[i] = _graph_distances(50, prof.pairs, i)
            dist = hops_cache[i][j]
            if dist > 2 or dist < 0:
                assert prof.d_ij(i, j) == 0.0
                assert (i, j) not in support


def test_add_one_residual_is_zero():
    grid = grid_for(2, 20000)
    ball = Ball((0.5, 0.5), 0.3)
    stream = POLICY.stream(7, "X")
    for _ in range(5):
        x = stream.random((12, 2))
        extra = stream.random(2)
        assert add_one_decomposition_check(ball, x, extra, grid) == 0.0
    # configuration entirely inside the target: both sides vanish
    inside = 0.45 + 0.1 * stream.random((6, 2))
    assert add_one_decomposition_check(ball, inside, np.array([0.5, 0.52]), grid) == 0.0


def test_radii_conventions():
    grid = grid_for(2, 20000)
    stream = POLICY.stream(8, "X")
    x = stream.random((60, 2))
    # single point: own cell spans the cube
    r0 = voronoi_radii(x[:1], x[0], 0, grid)
    assert r0 > 0.5
    # missing k-th order neighbors fall back to the cube diameter
    assert voronoi_radii(x[:1], x[0], 1, grid) == np.sqrt(2.0)
    r0 = voronoi_radii(x, x[3], 0, grid)
    r1 = voronoi_radii(x, x[3], 1, grid)
    r2 = voronoi_radii(x, x[3], 2, grid)
    assert 0 < r0 <= r1 <= r2


def test_cell_volume_radius_inequality():
    # cell measure <= kappa_d * (R_0 + stratum diagonal)^d for every nucleus
    grid = grid_for(2, 40000)
    x = POLICY.stream(9, "X").random((45, 2))
    assign = assign_nearest(x, grid, k=1)
    pad = grid.stratum_side * np.sqrt(2.0)
    for i in range(len(x)):
        sel = assign.idx[:, 0] == i
        measure = sel.sum() / grid.m
        if not np.any(sel):
            continue
        r0 = np.sqrt(((grid.points[sel] - x[i]) ** 2).sum(axis=1)).max()
        assert measure <= unit_ball_volume(2) * (r0 + pad) ** 2 + 1e-12


def test_max_cell_radius_event_monotone():
    grid = grid_for(2, 20000)
    x = POLICY.stream(10, "X").random((200, 2))
    r = max_cell_radius(x, grid)
    n = len(x)
    rho_small = r * np.sqrt(n) * 0.9
    rho_big = r * np.sqrt(n) * 1.1
    assert not max_cell_radius_event(x, grid, rho_small)
    assert max_cell_radius_event(x, grid, rho_big)
    assert rho_threshold(4000, 2, 0.1) > 0
    # single point: the cell spans the cube while the n=1 threshold vanishes
    assert not max_cell_radius_event(x[:1], grid, rho_threshold(1, 2, 0.1))


def test_rolling_ball_whole_cube_is_zero():
    grid = grid_for(2, 10000)
    whole = Ball((0.5, 0.5), 5.0)
    gp, gm = rolling_ball_integral(whole, 0.05, 1.0, grid,
                                   stream=POLICY.stream(11, "integration"))
    assert gp == 0.0  # outer band is empty when K covers the cube


def test_rolling_ball_1d_analytic():
    # slab target: gamma(K, r) = integral over (theta, theta+r] of
    # ((theta + r - x)/r)^2 dx = r/3, same for the complement side
    grid = grid_for(1, 200000)
    k = HalfInterval(0.5)
    for r in (0.1, 0.05, 0.025):
        gp, gm = rolling_ball_integral(
            k, r, 1.0, grid, m_inner=2048,
            stream=POLICY.stream(12, "integration"))
        assert abs(gp - r / 3.0) < 0.15 * r
        assert abs(gm - r / 3.0) < 0.15 * r
        band = boundary_band_volume(k, r, grid)
        assert abs(band - 2 * r) < 0.01 * r
        # normalized ratio stays bounded away from zero
        assert (gp + gm) / band > 0.2


def test_rolling_ball_ratio_stable_for_ball():
    grid = grid_for(2, 60000)
    ball = Ball((0.5, 0.5), 0.3)
    ratios = []
    for r in (0.08, 0.04, 0.02):
        gp, gm = rolling_ball_integral(
            ball, r, 1.0, grid, m_inner=512,
            stream=POLICY.stream(13, "integration"))
        band = boundary_band_volume(ball, r, grid)
        ratios.append((gp + gm) / band)
    assert max(ratios) / min(ratios) < 2.0
