import cmath
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from spex.arith import factorize, primes_up_to
from spex.errors import BudgetExceeded
from spex.expsum import (
    GROUPS,
    bound_menu,
    classify_primes,
    composite_log_bound,
    crt_decompose,
    expsum_report,
    pairwise_sum,
    poly_values,
    root_count,
    sum_units,
    sum_via_crt,
)
from spex.poly import make_poly, reduce_exponents_prime


def naive_sum(f):
    q = f.q
    return sum(cmath.exp(2j * math.pi * f(x) / q) for x in range(1, q) if math.gcd(x, q) == 1)


def test_oracle_agreement_small():
    rng = random.Random(3)
    for _ in range(100):
        q = rng.randint(2, 400)
        try:
            f = make_poly(q, [(rng.randint(1, q), rng.randint(1, 10**6)) for _ in range(rng.randint(1, 4))])
        except Exception:
            continue
        assert abs(sum_units(f) - naive_sum(f)) < 1e-9 * q


def test_examples():
    for p in (2, 3, 101, 9973):
        assert abs(sum_units(make_poly(p, [(1, 1)])) + 1) < 1e-9
    assert abs(sum_units(make_poly(5, [(1, 2)])) - (math.sqrt(5) - 1)) < 1e-12
    for p in (7, 13):
        expected = (p - 1) * cmath.exp(2j * math.pi / p)
        assert abs(sum_units(make_poly(p, [(1, p - 1)])) - expected) < 1e-9


def test_large_modulus_values():
    q = 2**62 + 135  # above the int64-safe bound: exact Python integers
    x = np.array([2, 3, 10**9], dtype=np.int64)
    vals = poly_values([5, 7], [3, 10**15], q, x)
    assert list(vals) == [(5 * pow(int(v), 3, q) + 7 * pow(int(v), 10**15, q)) % q for v in x]
    with pytest.raises(BudgetExceeded):
        sum_units(make_poly(q, [(1, 1)]))


def test_budget_refusal():
    with pytest.raises(BudgetExceeded, match="budget 10"):
        sum_units(make_poly(101, [(1, 2)]), budget=10)


def test_crt_decompose_examples():
    f = make_poly(15, [(1, 1), (1, 2)])
    assert crt_decompose(f) == [(3, 1, 2), (5, 1, 2)]
    assert crt_decompose(make_poly(101, [(1, 1)])) == [(101, 1, 1)]
    g = make_poly(12, [(1, 1), (1, 5)])
    assert crt_decompose(g) == [(2, 2, 3), (3, 1, 1)]
    s4 = sum_units(make_poly(4, [(3, 1), (3, 5)]))
    s3 = sum_units(make_poly(3, [(1, 1), (1, 5)]))
    assert abs(sum_units(g) - s4 * s3) < 1e-9
    assert abs(sum_units(f) - sum_via_crt(f)) < 1e-9


def test_worker_independence():
    f = make_poly(1000003, [(1, 3), (5, 77), (9, 1001)])
    values = {sum_units(f, workers=w) for w in (1, 2, 3, 8)}
    assert len(values) == 1


def test_pairwise_sum():
    assert pairwise_sum(np.array([])) == 0.0
    assert pairwise_sum(np.arange(7.0)) == 21.0


def test_magnitude_bounded_by_phi():
    rng = random.Random(11)
    for _ in range(100):
        q = rng.randint(2, 5000)
        try:
            f = make_poly(q, [(rng.randint(1, q), rng.randint(1, 99)) for _ in range(3)])
        except Exception:
            continue
        rep = expsum_report(f, bounds=False)
        assert rep.magnitude <= rep.phi * (1 + 1e-9)


def test_root_count_examples():
    assert root_count(make_poly(7, [(1, 3), (6, 1)])).count == 3
    assert root_count(make_poly(7, [(1, 4), (6, 1)])).count == 4
    assert root_count(make_poly(13, [(1, 1)])).count == 1
    rc = root_count(make_poly(13, [(1, 4)]))
    assert rc.D == 4 and rc.monomial_convention


def test_root_count_at_most_degree():
    rng = random.Random(5)
    for _ in range(200):
        p = rng.choice(primes_up_to(200)[2:])
        f = make_poly(p, [(rng.randint(1, p - 1), rng.randint(1, 500)) for _ in range(3)])
        fbar = reduce_exponents_prime(f)
        assert root_count(f).count <= fbar.degree


def test_bound_menu_examples():
    menu = {b.name: b for b in bound_menu(make_poly(5, [(1, 2)]))}
    assert abs(menu["weil"].value - math.sqrt(5)) < 1e-12
    menu = {b.name: b for b in bound_menu(make_poly(11, [(1, 3), (1, 7)]))}
    assert abs(menu["cochrane_pinner"].value - (2 + 2.292 * 11 ** (89 / 92))) < 1e-9
    assert menu["sparse_rho"].applicable
    menu = {b.name: b for b in bound_menu(make_poly(101, [(1, 1)]))}
    assert abs(menu["sparse_rho"].value - 101 ** (1 - 3 / 92)) < 1e-9
    assert menu["sparse_rho"].kind == "shape"
    menu = {b.name: b for b in bound_menu(make_poly(15, [(1, 1)]))}
    assert not menu["weil"].applicable and menu["trivial"].value == pytest.approx(8)


def test_composite_log_bound():
    b = composite_log_bound(make_poly(10**6, [(1, 1)]))
    assert b.log_bound == pytest.approx(1 + (1 - 3 / 184) * math.log(10**6))
    b = composite_log_bound(make_poly(10**6, [(1, 2)]))
    assert b.trivial and b.log_bound > 262144
    assert composite_log_bound(make_poly(10**6, [(1, 1), (1, 2)])).sigma == Fraction(1, 400)
    b = composite_log_bound(make_poly(10**6 + 3, [(1, 10**12)]))
    assert math.isfinite(b.log_bound) or b.log_bound == math.inf


def test_classify_primes_examples():
    cls = classify_primes(make_poly(105, [(1, 1), (1, 3)]))
    groups = {e.p: e.group for e in cls.entries}
    assert groups[7] == "condition_failure"
    assert all(e.tier == "prime" for e in cls.entries)
    cls = classify_primes(make_poly(2**9, [(1, 2)]))
    (entry,) = cls.entries
    assert not entry.large_exponent_gcd and entry.tier == "moderate"
    cls = classify_primes(make_poly(2**30 * 3, [(1, 1)]))
    assert cls.product(GROUPS[0]) == 1 and cls.product(GROUPS[1]) == 1


def test_classification_partitions_q():
    rng = random.Random(2)
    for _ in range(100):
        q = rng.randint(2, 10**9)
        f = make_poly(q, [(1, rng.randint(1, 10**6)), (1, rng.randint(1, 10**6) * 2)])
        cls = classify_primes(f)
        total = math.prod(cls.product(g) for g in GROUPS) * math.prod(
            cls.product(None, t) for t in ("prime", "moderate", "high"))
        assert total == q
        assert [e.p for e in cls.entries] == list(factorize(q).primes)
