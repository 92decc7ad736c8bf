import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spex.discrepancy import (
    PointSet,
    box_deviation,
    build_points_multivariate,
    build_points_powgen,
    compare_with_bound,
    extreme_discrepancy,
    koksma_szusz_rhs,
    powgen_discrepancy_bound,
    star_discrepancy,
)
from spex.errors import BudgetExceeded, SpexError
from spex.powgen import make_generator, make_multivariate


def lattice_oracle(pts, m, star):
    """Brute force for points on the lattice (1/m)Z: every box with lattice faces, each face open or closed."""
    n, s = pts.shape
    vals = np.arange(m + 1) / m
    axes = []
    for j in range(s):
        x, opts = pts[:, j], []
        for a in range(1 if star else m + 1):
            for b in range(a, m + 1):
                for lo_closed in (True,) if star else (True, False):
                    for hi_closed in (True, False):
                        mask = (x >= vals[a]) if lo_closed else (x > vals[a])
                        mask = mask & ((x <= vals[b]) if hi_closed else (x < vals[b]))
                        opts.append((mask, vals[b] - vals[a]))
        axes.append(opts)
    best = 0.0
    for combo in itertools.product(*axes):
        mask = np.all([c[0] for c in combo], axis=0)
        best = max(best, abs(mask.sum() / n - math.prod(c[1] for c in combo)))
    return best


def test_exact_matches_lattice_oracle():
    rng = np.random.default_rng(5)
    for _ in range(40):
        n, s = rng.integers(1, 6), rng.integers(1, 3)
        pts = rng.integers(0, 6, (n, s)) / 6
        ps = PointSet(pts)
        assert extreme_discrepancy(ps, "exact").value == pytest.approx(lattice_oracle(pts, 6, False), abs=1e-12)
        assert star_discrepancy(ps, "exact").value == pytest.approx(lattice_oracle(pts, 6, True), abs=1e-12)


def test_one_dimensional_examples():
    ps = PointSet([(2 * i - 1) / 8 for i in range(1, 5)])
    assert star_discrepancy(ps).value == pytest.approx(0.125)
    assert extreme_discrepancy(ps).value == pytest.approx(0.25)
    for n in (1, 2, 5, 16, 100):
        assert star_discrepancy(PointSet([(2 * i - 1) / (2 * n) for i in range(1, n + 1)])).value == pytest.approx(1 / (2 * n))
        assert star_discrepancy(PointSet([i / n for i in range(n)])).value == pytest.approx(1 / n)


def test_single_point():
    # the closed degenerate box {0.5} is a limit of half-open boxes [0.5, 0.5 + d)
    ps = PointSet([0.5])
    assert extreme_discrepancy(ps).value == pytest.approx(1.0)
    assert star_discrepancy(ps).value == pytest.approx(0.5)
    assert box_deviation(ps, [0.0], [0.5]) == pytest.approx(0.5)
    assert box_deviation(ps, [0.5], [1.0]) == pytest.approx(0.5)
    assert box_deviation(ps, [0.5], [0.5 + 1e-9]) == pytest.approx(1.0)


def test_corner_point_star():
    ps = PointSet([[0.9, 0.9]])
    assert box_deviation(ps, [0, 0], [0.9, 0.9]) == pytest.approx(0.81)
    assert star_discrepancy(ps).value == pytest.approx(0.9)
    dup = PointSet([[0.3, 0.6]] * 5)
    assert star_discrepancy(dup).value >= 1 - 0.3 * 0.6 - 1e-12


def test_boundary_inside_variant():
    ps = PointSet([0.5])
    rep = extreme_discrepancy(ps, boundary_inside=True)
    assert rep.convention == "boundary-inside"
    assert rep.value <= extreme_discrepancy(ps).value
    with pytest.raises(SpexError):
        extreme_discrepancy(ps, "grid", boundary_inside=True)


def _random_sets(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield PointSet(rng.random((rng.integers(1, 21), rng.integers(1, 3))))


def test_star_extreme_inclusion():
    for ps in _random_sets(60, 1):
        star = star_discrepancy(ps).value
        ext = extreme_discrepancy(ps).value
        assert star <= ext + 1e-12
        assert ext <= 2**ps.s * star + 1e-12


def test_grid_bracket_is_certified():
    for ps in _random_sets(30, 2):
        for func, slack in ((star_discrepancy, 1), (extreme_discrepancy, 2)):
            exact = func(ps, "exact").value
            rep = func(ps, "grid", 64)
            assert rep.lower <= exact + 1e-12
            assert exact <= rep.upper + 1e-12
            assert rep.upper == pytest.approx(min(1.0, rep.lower + slack * ps.s / 64))


def test_grid_star_within_s_over_g():
    for ps in _random_sets(30, 3):
        exact = star_discrepancy(ps, "exact").value
        assert exact - star_discrepancy(ps, "grid", 400).lower <= ps.s / 400 + 1e-12


def test_grid_matches_grid_brute_force():
    rng = np.random.default_rng(4)
    g = 8
    for _ in range(10):
        pts = rng.random((rng.integers(1, 8), 2))
        ps = PointSet(pts)
        best = 0.0
        for a0, b0, a1, b1 in itertools.product(range(g + 1), repeat=4):
            if a0 <= b0 and a1 <= b1:
                best = max(best, box_deviation(ps, [a0 / g, a1 / g], [b0 / g, b1 / g]))
        assert extreme_discrepancy(ps, "grid", g).lower == pytest.approx(best, abs=1e-12)


def test_three_dimensional_paths():
    rng = np.random.default_rng(6)
    ps = PointSet(rng.random((4, 3)))
    exact = extreme_discrepancy(ps, "exact").value
    grid = extreme_discrepancy(ps, "grid", 6)
    assert grid.lower <= exact <= grid.upper
    star = star_discrepancy(ps, "exact").value
    sgrid = star_discrepancy(ps, "grid", 20)
    assert sgrid.lower <= star <= sgrid.upper


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 0.999), st.floats(0, 0.999)), min_size=1, max_size=10))
def test_permutation_invariance(pts):
    a = np.array(pts)
    d1 = extreme_discrepancy(PointSet(a)).value
    d2 = extreme_discrepancy(PointSet(a[:, ::-1])).value
    d3 = extreme_discrepancy(PointSet(a[::-1])).value
    assert d1 == pytest.approx(d2, abs=1e-12) and d1 == pytest.approx(d3, abs=1e-12)


def test_auto_switches_to_grid_and_budget():
    rng = np.random.default_rng(7)
    ps = PointSet(rng.random((200, 2)))
    rep = extreme_discrepancy(ps, budget=10**8)
    assert rep.method == "grid-256" and rep.lower <= rep.upper
    with pytest.raises(BudgetExceeded):
        extreme_discrepancy(ps, "exact", budget=10**6)


def test_point_set_validation():
    with pytest.raises(SpexError):
        PointSet([1.0])
    with pytest.raises(SpexError):
        PointSet(np.zeros((0, 2)))


def test_powgen_points():
    g = make_generator(11, 3, 2)
    ps = build_points_powgen(g, 2, 4)
    expected = np.array([[8, 6], [6, 7], [7, 2], [2, 8]]) / 11
    assert np.array_equal(ps.points, expected)
    assert build_points_powgen(g, 1, 1).points.tolist() == [[8 / 11]]
    shifted = build_points_powgen(g, 2, 3, shifts=(0, 2))
    assert np.array_equal(shifted.points, np.array([[8, 7], [6, 2], [7, 8]]) / 11)
    with pytest.warns(UserWarning):
        build_points_powgen(g, 1, 6)


def test_multivariate_points():
    sys2 = make_multivariate("monomial", 11, {"matrix": [[3, 0], [1, 3]]})
    ps = build_points_multivariate(sys2, (2, 3), 1, 1)
    assert ps.points.tolist() == [[8 / 11, 10 / 11]]


def test_koksma_szusz_examples():
    assert koksma_szusz_rhs(PointSet([0.0] * 7), 1) == 2.0
    for n, a in [(64, 16), (10, 3), (50, 49)]:
        assert koksma_szusz_rhs(PointSet([j / n for j in range(n)]), a) == pytest.approx(1 / a, abs=1e-9)
    with pytest.raises(BudgetExceeded):
        koksma_szusz_rhs(PointSet([0.0]), 10**4, budget=100)


def test_koksma_szusz_two_dim_direct():
    rng = np.random.default_rng(8)
    pts = rng.random((6, 2))
    A = 3
    total = 0.0
    for a1 in range(-A, A + 1):
        for a2 in range(-A, A + 1):
            if a1 == a2 == 0:
                continue
            s = np.sum(np.exp(2j * np.pi * (a1 * pts[:, 0] + a2 * pts[:, 1])))
            total += abs(s) / ((abs(a1) + 1) * (abs(a2) + 1))
    assert koksma_szusz_rhs(PointSet(pts), A) == pytest.approx(1 / A + total / 6, rel=1e-12)


def test_koksma_szusz_grid_product():
    # a full product grid has vanishing sums for every non-zero frequency below the grid size
    g = np.arange(8) / 8
    pts = np.array([(x, y) for x in g for y in g])
    assert koksma_szusz_rhs(PointSet(pts), 4) == pytest.approx(0.25, abs=1e-9)


def test_bound_shape():
    b = powgen_discrepancy_bound(10007, 100, 1)
    assert b.rho == "3/92"
    assert powgen_discrepancy_bound(10007, 100, 2).rho == "3/47380"
    p = 10007
    assert powgen_discrepancy_bound(p, p, 1).value == pytest.approx(p ** (-0.5 * 3 / 92))
    assert powgen_discrepancy_bound(p, p, 1).value < 1
    assert b.threshold == pytest.approx(p ** (1 - 3 / 92))


def test_compare_with_bound():
    g = make_generator(1009, 5, 11)
    cmp = compare_with_bound(g)
    assert cmp.N == g.tau
    assert 0 <= cmp.discrepancy.value <= 1
    assert cmp.ratio == pytest.approx(cmp.discrepancy.value / cmp.bound.value)
