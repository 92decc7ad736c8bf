from fractions import Fraction
from itertools import product

import pytest

from spex.counting import (
    J_distribution,
    check_fourth_moment_conditions,
    count_I,
    unpack_lambda,
    verify_moments,
)
from spex.errors import BudgetExceeded


def brute_I(exps, t, p):
    tuples = list(product(range(1, p), repeat=t))
    fp = [tuple(sum(pow(x, e, p) for x in tup) % p for e in exps) for tup in tuples]
    return sum(1 for a in fp for b in fp if a == b)


def test_count_I_examples():
    assert count_I([2], 1, 7) == 12
    # x1 + x2 = y1 + y2 in F_5: 16 pairs split 4, 3, 3, 3, 3 over the residues
    assert count_I([1], 2, 5) == 4**2 + 4 * 3**2 == 52
    assert count_I([3], 1, 11) == 10


def test_count_I_matches_brute_force():
    for p in (3, 5, 7):
        for exps in ([1], [2], [1, 2], [2, 3]):
            for t in (1, 2):
                assert count_I(exps, t, p) == brute_I(exps, t, p)


def test_J_examples():
    assert J_distribution([1], [1], 1, 5) == {1: 1, 2: 1, 3: 1, 4: 1}
    assert J_distribution([1], [2], 1, 7) == {1: 2, 2: 2, 4: 2}
    dist = J_distribution([1, 1], [1, 2], 1, 7)
    assert len(dist) == 6 and set(dist.values()) == {1}
    assert {unpack_lambda(k, 7, 2) for k in dist} == {(x, x * x % 7) for x in range(1, 7)}


def test_moment_identities_grid():
    for p in (5, 7, 11, 13, 17, 19, 23, 29, 31):
        for exps in ([1], [2], [3], [1, 2], [2, 5]):
            for t in (1, 2):
                rep = verify_moments([1] * len(exps), exps, t, p)
                assert rep.sum_J == (p - 1) ** t
                assert rep.sum_J_sq == rep.I_rt
                assert abs(rep.orthogonality_value - rep.I_rt) <= 1e-6 * rep.I_rt


def test_moment_examples():
    rep = verify_moments([1], [2], 1, 5)
    assert (rep.sum_J, rep.sum_J_sq, rep.I_rt) == (4, 8, 8)
    rep = verify_moments([1, 1], [1, 2], 1, 7)
    assert (rep.sum_J, rep.sum_J_sq, rep.I_rt) == (6, 6, 6)


def test_count_I_invariant_under_exponent_folding():
    for p in (5, 7, 11, 13):
        for e in range(1, 3 * p):
            folded = (e - 1) % (p - 1) + 1
            assert count_I([e], 2, p) == count_I([folded], 2, p)


def test_dropping_equation_grows_count():
    for p in (5, 7, 11, 13):
        for e1 in range(1, p):
            for e2 in (1, 2, 3):
                for t in (1, 2):
                    assert count_I([e1, e2], t, p) <= count_I([e1], t, p)


def test_budget_refusal():
    with pytest.raises(BudgetExceeded):
        count_I([1], 3, 101, budget=10**6)


def test_fourth_moment_conditions():
    rep = check_fourth_moment_conditions([3, 7], 11)
    assert rep.coprime_report.passed
    assert rep.eps_reference == pytest.approx(11 ** (3 - 12 / 92))
    assert rep.coprime_reference == pytest.approx(11 ** (3 - 3 / 23))
    assert not check_fourth_moment_conditions([2, 4], 13).coprime_report.passed
    assert check_fourth_moment_conditions([3, 7], 11, Fraction(1, 10)).eps_report.condition.startswith("fourth")
