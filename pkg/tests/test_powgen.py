import pytest

from spex.arith import multiplicative_order, primes_up_to
from spex.errors import SpexError
from spex.powgen import (
    floyd_cycle,
    iterate,
    make_generator,
    make_multivariate,
    nth_term,
    orbit_cycle,
    sequence,
    verify_order_lemmas,
)
from spex.rng import SplitMix64


def test_generator_examples():
    g = make_generator(11, 3, 2)
    assert (g.T, g.tau, g.preperiod) == (10, 4, 0)
    assert sequence(g, 5) == [2, 8, 6, 7, 2]
    g = make_generator(101, 5, 1)
    assert (g.T, g.tau) == (1, 1) and sequence(g, 3) == [1, 1, 1]
    g = make_generator(7, 2, 3)
    assert (g.T, g.preperiod, g.tau) == (6, 1, 2)
    assert sequence(g, 5) == [3, 2, 4, 2, 4]


def test_generator_errors():
    with pytest.raises(SpexError):
        make_generator(11, 3, 0)
    with pytest.raises(SpexError):
        make_generator(11, 1, 2)
    with pytest.raises(SpexError):
        make_generator(12, 3, 5)


def test_nth_term_examples():
    g = make_generator(11, 3, 2)
    assert nth_term(g, 2) == 6
    assert nth_term(g, 0) == 2
    assert nth_term(g, -1) == 7 and pow(7, 3, 11) == 2
    with pytest.raises(SpexError):
        nth_term(make_generator(7, 2, 3), -1)


def _random_specs(count, seed):
    rng = SplitMix64(seed)
    primes = primes_up_to(10**4)[1:]
    for _ in range(count):
        p = rng.choice(primes)
        yield make_generator(p, rng.randint(2, p - 1), rng.randint(1, p - 1))


def test_nth_term_matches_iteration():
    for g in _random_specs(30, seed=11):
        u = g.theta
        for n in range(2000):
            assert nth_term(g, n) == u
            u = pow(u, g.e, g.p)


def test_period_is_exact():
    for g in _random_specs(40, seed=12):
        if g.tau > 10**5:
            continue
        seq = sequence(g, g.preperiod + 2 * g.tau + 1)
        base = g.preperiod
        assert all(seq[n + g.tau] == seq[n] for n in range(base, base + g.tau))
        assert all(seq[base + t] != seq[base] for t in range(1, g.tau))
        if g.preperiod:
            assert seq[g.preperiod - 1] not in seq[base : base + g.tau]
        if g.purely_periodic and g.T > 1:
            assert g.preperiod == 0 and g.tau == multiplicative_order(g.e, g.T)


def _cycle_by_scan(step, x0):
    seen = {}
    x, n = x0, 0
    while x not in seen:
        seen[x] = n
        x, n = step(x), n + 1
    return seen[x], n - seen[x]


def test_floyd_matches_orbit_scan():
    assert floyd_cycle(lambda k: k // 2 if k > 4 else (k + 1) % 5, 40) == (4, 5)
    for m in (7, 30, 255, 1000):
        for c in (1, 3):
            step = lambda k: (k * k + c) % m
            for x0 in range(0, m, max(1, m // 17)):
                assert floyd_cycle(step, x0) == _cycle_by_scan(step, x0)


def test_order_lemmas_small():
    report = verify_order_lemmas(300)
    assert report.passed
    assert report.checked_divisor_orders and report.checked_gcd_powers and report.checked_residue_counts
    with pytest.raises(SpexError):
        verify_order_lemmas(10**5)


def test_order_lemma_examples():
    # q = 10, e = 3: tau = 4, gcd(3^2 - 1, 10) = 2 <= 2 * 10 / 4
    assert multiplicative_order(3, 10) == 4
    assert 2 * 4 <= 2 * 10


def test_monomial_system_examples():
    sys2 = make_multivariate("monomial", 11, {"matrix": [[3, 0], [1, 3]]})
    assert iterate(sys2, (2, 3), 2) == [(2, 3), (8, 10)]
    with pytest.raises(SpexError):
        make_multivariate("monomial", 11, {"matrix": [[3, 1], [1, 3]]})
    # upper triangular is also accepted
    make_multivariate("monomial", 11, {"matrix": [[3, 1], [0, 3]]})


def test_monomial_one_dim_is_power_generator():
    for p, e, theta in [(11, 3, 2), (101, 7, 5), (7, 2, 3), (1009, 11, 17)]:
        g = make_generator(p, e, theta)
        sys1 = make_multivariate("monomial", p, {"matrix": [[e]]})
        n = g.preperiod + g.tau + 3
        assert [u[0] for u in iterate(sys1, (theta,), n)] == sequence(g, n)
        assert orbit_cycle(sys1, (theta,)) == (g.preperiod, g.tau)


def test_linear_system_one_step():
    p, e = 13, 3
    params = {"e": e, "L0": [1, 2], "L1": [3, 4], "F": [[5, 6]]}
    sys2 = make_multivariate("linear", p, params)
    x1, x2 = 7, 9
    expected = ((pow(x1, e, p) * (3 + 4 * x2) + (1 + 2 * x2)) % p, (5 + 6 * x2) % p)
    assert iterate(sys2, (x1, x2), 2)[1] == expected
    with pytest.raises(SpexError):
        make_multivariate("linear", p, {"e": e, "L0": [1, 0], "L1": [3, 4], "F": [[5, 6]]})


def test_shifted_system():
    p = 11
    # G_1(X_2) = X_2^2 + 1 has no roots mod 11 since -1 is a non-residue
    params = {"exponents": [3, 2], "shifts": [1, 2], "G": [[[1, [2]], [1, [0]]]], "g_m": 5}
    sys2 = make_multivariate("shifted", p, params)
    u1 = sys2.step((4, 6))
    assert u1 == ((pow(3, 3, p) * (36 + 1) + 1) % p, (5 * 16 + 2) % p)
    bad = {"exponents": [3, 2], "shifts": [1, 2], "G": [[[1, [2]], [10, [0]]]], "g_m": 5}  # X^2 - 1
    with pytest.raises(SpexError, match="vanishes"):
        make_multivariate("shifted", p, bad)
    with pytest.raises(SpexError, match="assume_zero_free"):
        make_multivariate("shifted", 1009, {"exponents": [3, 2, 2], "shifts": [0, 0, 0],
                                             "G": [[[1, [2, 2]], [1, [0, 0]]], [[1, [2]], [1, [0]]]], "g_m": 1})
    make_multivariate("shifted", 1009, {"exponents": [3, 2, 2], "shifts": [0, 0, 0],
                                         "G": [[[1, [2, 2]], [1, [0, 0]]], [[1, [2]], [1, [0]]]], "g_m": 1},
                      assume_zero_free=True)
