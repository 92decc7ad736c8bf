"""Complete exponential sums S_q(f) = sum over units x of exp(2 pi i f(x) / q).

The kernel walks x = 1..q-1 in fixed chunks of ``CHUNK`` residues, keeps the
units, reduces f(x) to [0, q) in exact integer arithmetic and only then
scales by 2 pi / q. Each chunk is summed by a pairwise tree and the chunk
partials are combined by another pairwise tree in chunk order, so the result
is bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import config
from .arith import INT64_SAFE_MODULUS, euler_phi, factorize, inverse_mod, is_prime, powmod_array, valuation
from .bounds import RHO_EPS, kappa, rho, sigma
from .errors import BudgetExceeded, SpexError
from .poly import (
    ConditionReport,
    SparsePolynomial,
    check_composite_conditions,
    check_kappa_conditions,
    check_prime_power_condition,
    check_rho_conditions,
    difference_gcd,
    reduce_exponents_prime,
    scale,
)

CHUNK = 1 << 16
TWO_PI = 2.0 * math.pi
SHAPE = "shape only; implied constant unknown"


def pairwise_sum(values: np.ndarray) -> float:
    """Sum by a balanced binary tree in index order."""
    a = np.asarray(values, dtype=np.float64)
    if a.size == 0:
        return 0.0
    while a.size > 1:
        if a.size & 1:
            a = np.append(a, 0.0)
        a = a[0::2] + a[1::2]
    return float(a[0])


def poly_values(coeffs: Sequence[int], exps: Sequence[int], q: int, x: np.ndarray,
                unit_period: int | None = None) -> np.ndarray:
    """f(x) mod q for an int64 array x.

    If every x is a unit, ``unit_period`` (any multiple of the group exponent,
    e.g. phi(q)) lets exponents be reduced first.
    """
    if q > INT64_SAFE_MODULUS:
        out = [sum(int(a) * pow(int(v), int(e), q) for a, e in zip(coeffs, exps)) % q for v in x]
        return np.array(out, dtype=object)
    acc = np.zeros(x.shape, dtype=np.int64)
    for a, e in zip(coeffs, exps):
        a %= q
        if a == 0:
            continue
        if unit_period is not None and e >= unit_period:
            e %= unit_period
        acc = (acc + a * powmod_array(x, e, q)) % q
    return acc


def _chunk_sum(coeffs, exps, q, phi, prime, start, stop):
    x = np.arange(start, stop, dtype=np.int64)
    if not prime:
        x = x[np.gcd(x, q) == 1]
    if x.size == 0:
        return 0.0, 0.0
    v = poly_values(coeffs, exps, q, x, unit_period=phi)
    theta = np.asarray(v, dtype=np.float64) * (TWO_PI / q)
    return pairwise_sum(np.cos(theta)), pairwise_sum(np.sin(theta))


def unit_sum(coeffs: Sequence[int], exps: Sequence[int], q: int, budget: int | None = None,
             workers: int | None = None) -> complex:
    """Raw kernel for ``sum_{x in Z_q^*} e_q(sum a_i x^e_i)``; coefficients may be zero."""
    if q < 2:
        raise SpexError(f"modulus must be >= 2, got {q}")
    fact = factorize(q)
    phi = euler_phi(fact)
    limit = config.budget("sum_units", budget)
    if phi > limit:
        raise BudgetExceeded(f"exponential sum modulo {q}", phi, limit)
    prime = fact.is_prime()
    starts = range(1, q, CHUNK)
    jobs = [(s, min(s + CHUNK, q)) for s in starts]
    n_workers = min(config.threads(workers), max(1, len(jobs)))
    if n_workers == 1:
        parts = [_chunk_sum(coeffs, exps, q, phi, prime, a, b) for a, b in jobs]
    else:
        with ThreadPoolExecutor(n_workers) as pool:
            parts = list(pool.map(lambda ab: _chunk_sum(coeffs, exps, q, phi, prime, *ab), jobs))
    re = pairwise_sum(np.array([p[0] for p in parts]))
    im = pairwise_sum(np.array([p[1] for p in parts]))
    return complex(re, im)


def sum_units(f: SparsePolynomial, budget: int | None = None, workers: int | None = None) -> complex:
    return unit_sum(f.coeffs, f.exponents, f.q, budget=budget, workers=workers)


def crt_decompose(f: SparsePolynomial) -> list[tuple[int, int, int]]:
    """``[(p, m_p, lambda_p)]`` with lambda_p = (q / p^m_p)^-1 mod p^m_p.

    Then S_q(f) = prod_p S_{p^m_p}(lambda_p f).
    """
    q = f.q
    out = []
    for p, m in factorize(q):
        pm = p**m
        out.append((p, m, inverse_mod(q // pm, pm) if pm < q else 1))
    return out


def sum_via_crt(f: SparsePolynomial, budget: int | None = None, workers: int | None = None) -> complex:
    total = complex(1.0, 0.0)
    for p, m, lam in crt_decompose(f):
        pm = p**m
        total *= sum_units(scale(f, lam, pm), budget=budget, workers=workers)
    return total


class RootCount(NamedTuple):
    count: int
    D: int
    monomial_convention: bool


def root_count(f: SparsePolynomial, p: int | None = None) -> RootCount:
    """Number of x in F_p with f(x) = 0, and D = max gcd(e_i - e_j, p - 1)."""
    p = f.q if p is None else p
    if not is_prime(p):
        raise SpexError(f"{p} is not prime")
    coeffs = [a % p for a in f.coeffs]
    if all(a == 0 for a in coeffs):
        raise SpexError("polynomial vanishes identically modulo p")
    # f(0) = 0 because every exponent is >= 1
    count = 1
    for start in range(1, p, CHUNK):
        x = np.arange(start, min(start + CHUNK, p), dtype=np.int64)
        v = poly_values(coeffs, f.exponents, p, x, unit_period=p - 1)
        count += int(np.count_nonzero(np.asarray(v) == 0))
    D, flag = difference_gcd(f, p)
    return RootCount(count, D, flag)


# -- bounds ------------------------------------------------------------------


@dataclass(frozen=True)
class BoundEntry:
    name: str
    log_value: float
    kind: str  # "explicit" or "shape"
    applicable: bool
    conditions: ConditionReport | None = None
    note: str = ""

    @property
    def value(self) -> float | None:
        if self.log_value == -math.inf:
            return 0.0
        if not math.isfinite(self.log_value):
            return None
        try:
            return math.exp(self.log_value)
        except OverflowError:
            return None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "log_value": self.log_value if math.isfinite(self.log_value) else None,
            "kind": self.kind,
            "label": SHAPE if self.kind == "shape" else "explicit",
            "applicable": self.applicable,
            "conditions": self.conditions.to_json() if self.conditions else None,
            "note": self.note,
        }


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def _inapplicable(name: str, kind: str, why: str) -> BoundEntry:
    return BoundEntry(name, math.nan, kind, False, None, why)


class CompositeBound(NamedTuple):
    log_bound: float
    log_phi: float
    trivial: bool
    sigma: Fraction
    degree: int


def composite_log_bound(f: SparsePolynomial, q: int | None = None) -> CompositeBound:
    """ln of exp(d^18) q^(1 - sigma_r), never exponentiated.

    ``trivial`` is True when the bound is no better than phi(q).
    """
    q = f.q if q is None else q
    d = f.degree
    s, _ = sigma(f.r)
    try:
        d18 = float(d**18)
    except OverflowError:
        d18 = math.inf
    log_bound = d18 + float(1 - s) * math.log(q)
    log_phi = math.log(euler_phi(q))
    return CompositeBound(log_bound, log_phi, log_bound >= log_phi, s, d)


def bound_menu(f: SparsePolynomial, eps=RHO_EPS) -> list[BoundEntry]:
    """Every bound formula this toolkit knows, evaluated for f with its conditions."""
    q = f.q
    fact = factorize(q)
    phi = euler_phi(fact)
    entries = [BoundEntry("trivial", math.log(phi), "explicit", True, None, "phi(q)")]
    prime = fact.is_prime()
    need_prime = "needs a prime modulus"

    if prime:
        p = q
        fbar = reduce_exponents_prime(f)
        d = fbar.degree
        r = fbar.r
        entries.append(BoundEntry("weil", _log((d - 1) * math.sqrt(p)), "explicit", True, None,
                                  f"(d-1) sqrt(p) with d = {d} after folding exponents into [1, p-1]; bounds the complete sum over F_p"))
        entries.append(BoundEntry("weil_units", math.log((d - 1) * math.sqrt(p) + 1), "explicit", True, None,
                                  "(d-1) sqrt(p) + 1; the unit sum differs from the complete sum by the x = 0 term"))
        if r == 1:
            g = math.gcd(fbar.exponents[0], p - 1)
            val = math.sqrt(g) * p ** (2 / 3) * math.log(p) ** (1 / 6)
            entries.append(BoundEntry("shkredov", math.log(val), "shape", True, None,
                                      f"d^(1/2) p^(2/3) (log p)^(1/6) with d = gcd(e_1, p-1) = {g}"))
        else:
            entries.append(_inapplicable("shkredov", "shape", "monomials only"))
        if r == 2:
            e1, e2 = fbar.exponents
            g = math.gcd(math.gcd(e1, e2), p - 1)
            val = math.gcd(e2 - e1, p - 1) + 2.292 * g ** (13 / 46) * p ** (89 / 92)
            entries.append(BoundEntry("cochrane_pinner", math.log(val), "explicit", True, None,
                                      f"gcd(d-e, p-1) + 2.292 g^(13/46) p^(89/92), g = {g}"))
        else:
            entries.append(_inapplicable("cochrane_pinner", "explicit", "binomials only"))
        cond = check_kappa_conditions(fbar, p, eps)
        k = kappa(r, eps)
        entries.append(BoundEntry("sparse_kappa", float(1 - k) * math.log(p), "shape", cond.passed, cond,
                                  f"p^(1 - kappa_r(eps)), kappa_{r}({eps}) = {k}"))
        cond = check_rho_conditions(fbar, p)
        rr = rho(r)
        entries.append(BoundEntry("sparse_rho", float(1 - rr) * math.log(p), "shape", cond.passed, cond,
                                  f"p^(1 - rho_r), rho_{r} = {rr}"))
    else:
        for name, kind in (("weil", "explicit"), ("weil_units", "explicit"), ("shkredov", "shape"),
                           ("cochrane_pinner", "explicit"), ("sparse_kappa", "shape"), ("sparse_rho", "shape")):
            entries.append(_inapplicable(name, kind, need_prime))

    entries.append(BoundEntry("fixed_degree", (1 - 1 / f.r) * math.log(q), "shape", True, None,
                              "q^(1 - 1/r) for fixed degree"))

    if len(fact) == 1 and fact.factors[0][1] >= 2:
        p, m = fact.factors[0]
        cond = check_prime_power_condition(f, p, m)
        D, flag = difference_gcd(f, p)
        log_val = (m - 1 / f.r) * math.log(p) + math.log(D) / f.r
        note = f"p^(m - 1/r) D^(1/r), D = {D}" + (" (monomial: D taken as gcd(e_1, p-1))" if flag else "")
        entries.append(BoundEntry("prime_power", log_val, "shape", cond.passed, cond, note))
    else:
        entries.append(_inapplicable("prime_power", "shape", "needs q = p^m with m >= 2"))

    comp = composite_log_bound(f)
    entries.append(BoundEntry("composite_sigma", comp.log_bound, "shape", True, None,
                              f"exp(d^18) q^(1 - sigma_r), sigma_{f.r} = {comp.sigma}" + ("; trivial" if comp.trivial else "")))
    return entries


@dataclass(frozen=True)
class ExpSumReport:
    q: int
    f: SparsePolynomial
    value: complex
    phi: int
    bounds: tuple[BoundEntry, ...] = ()
    via_crt: complex | None = None

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    def to_json(self) -> dict:
        doc = {
            "q": self.q,
            "poly": self.f.to_json(),
            "sum": {"re": self.value.real, "im": self.value.imag, "abs": self.magnitude},
            "phi": self.phi,
            "bounds": [b.to_json() for b in self.bounds],
        }
        if self.via_crt is not None:
            doc["sum_via_crt"] = {"re": self.via_crt.real, "im": self.via_crt.imag, "abs": abs(self.via_crt)}
            doc["crt_difference"] = abs(self.value - self.via_crt)
        return doc


def expsum_report(f: SparsePolynomial, via_crt: bool = False, bounds: bool = True, eps=RHO_EPS,
                  budget: int | None = None, workers: int | None = None) -> ExpSumReport:
    value = sum_units(f, budget=budget, workers=workers)
    crt = sum_via_crt(f, budget=budget, workers=workers) if via_crt else None
    menu = tuple(bound_menu(f, eps)) if bounds else ()
    return ExpSumReport(f.q, f, value, euler_phi(f.q), menu, crt)


# -- prime classification for composite moduli -------------------------------

GROUPS = ("large_exponent_gcd", "deep_difference", "condition_failure")
TIERS = ("prime", "moderate", "high")


@dataclass(frozen=True)
class PrimeEntry:
    p: int
    m: int
    group: str | None  # one of GROUPS, or None for the generic primes
    tier: str  # multiplicity tier, one of TIERS
    large_exponent_gcd: bool
    deep_difference: bool
    condition_failure: bool


@dataclass(frozen=True)
class PrimeClassification:
    q: int
    r: int
    degree: int
    entries: tuple[PrimeEntry, ...]
    checks: dict = field(default_factory=dict)

    def product(self, group: str | None = None, tier: str | None = None) -> int:
        out = 1
        for e in self.entries:
            if group is not None and e.group == group:
                out *= e.p**e.m
            elif group is None and e.group is None and (tier is None or e.tier == tier):
                out *= e.p**e.m
        return out

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "r": self.r,
            "degree": self.degree,
            "primes": [
                {"p": e.p, "m": e.m, "group": e.group, "tier": e.tier,
                 "large_exponent_gcd": e.large_exponent_gcd, "deep_difference": e.deep_difference,
                 "condition_failure": e.condition_failure}
                for e in self.entries
            ],
            "products": {g: self.product(g) for g in GROUPS} | {f"generic_{t}": self.product(None, t) for t in TIERS},
            "checks": {g: {k: (_finite(v) if isinstance(v, float) else v) for k, v in c.items()}
                       for g, c in self.checks.items()},
        }


def _finite(x: float) -> float | None:
    return x if math.isfinite(x) else None


def _tier(m: int, r: int) -> str:
    if m == 1:
        return "prime"
    return "moderate" if m <= 20 * r * r else "high"


def _exp_or_inf(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def classify_primes(f: SparsePolynomial, q: int | None = None) -> PrimeClassification:
    """Split the primes of q into the three exceptional groups and generic tiers.

    large_exponent_gcd: gcd(p^m, e_1 ... e_r) > p^(m/3).
    deep_difference:    m > 20 r^2 and p^floor(m / (10 r)) divides prod_{i<j} (e_i - e_j).
    condition_failure:  not in the first group, m <= 20 r^2 and a prime-level gcd condition fails.
    A prime in both of the first two groups is listed under the first. All
    divisibility tests use p-adic valuations, so the exponent product is
    never formed.
    """
    q = f.q if q is None else q
    exps = f.exponents
    r = len(exps)
    d = f.degree
    entries = []
    for p, m in factorize(q):
        v_prod = sum(valuation(e, p) for e in exps)
        big_gcd = 3 * min(m, v_prod) > m
        v_diff = sum(valuation(exps[j] - exps[i], p) for i in range(r) for j in range(i + 1, r))
        deep = m > 20 * r * r and v_diff >= m // (10 * r)
        failure = (not big_gcd) and m <= 20 * r * r and not check_composite_conditions(exps, p).passed
        group = GROUPS[0] if big_gcd else GROUPS[1] if deep else GROUPS[2] if failure else None
        entries.append(PrimeEntry(p, m, group, _tier(m, r), big_gcd, deep, failure))
    cls = PrimeClassification(q, r, d, tuple(entries))
    log_d = math.log(d)
    limits = {
        GROUPS[0]: 3 * r * log_d,
        GROUPS[1]: 20 * r**3 * log_d,
        GROUPS[2]: 21 * r * r * _exp_or_inf(52 / 3 * log_d),
    }
    checks = {}
    for g in GROUPS:
        prod = cls.product(g)
        lhs = math.log(prod)
        # an empty group has product 1 and satisfies the size bound by convention
        checks[g] = {"log_product": lhs, "log_limit": limits[g], "holds": prod == 1 or lhs < limits[g]}
    return PrimeClassification(q, r, d, tuple(entries), checks)
