"""Sparse polynomials ``f(X) = sum a_i X^e_i`` over Z_q and their gcd admissibility tests.

Threshold comparisons ``g <= p**alpha`` keep the exponent alpha as an exact
fraction and only evaluate ``p**alpha`` in double precision. A comparison
within ``BOUNDARY_RTOL * p**alpha`` of equality passes and is flagged as a
boundary case so borderline inputs are visible in reports.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .arith import MAX_INT, is_prime, valuation
from .errors import SpexError

BOUNDARY_RTOL = 1e-9
MAX_EPSILON = Fraction(3, 92)


@dataclass(frozen=True)
class SparsePolynomial:
    q: int
    terms: tuple[tuple[int, int], ...]  # (coefficient, exponent), exponents increasing

    @property
    def r(self) -> int:
        return len(self.terms)

    @property
    def coeffs(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.terms)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(e for _, e in self.terms)

    @property
    def degree(self) -> int:
        return self.terms[-1][1]

    def __call__(self, x: int) -> int:
        return evaluate(self, x)

    def __str__(self) -> str:
        return format_poly(self)

    def to_json(self) -> dict:
        return {"q": self.q, "terms": [[a, e] for a, e in self.terms]}


def make_poly(q: int, terms: Iterable[tuple[int, int]]) -> SparsePolynomial:
    """Normalise raw ``(coefficient, exponent)`` pairs into a SparsePolynomial.

    Duplicate exponents are merged by adding coefficients; zero terms are
    dropped. Raises SpexError when nothing survives or gcd(a_1..a_r, q) > 1.
    """
    if q < 2:
        raise SpexError(f"modulus must be >= 2, got {q}")
    merged: dict[int, int] = {}
    count = 0
    for a, e in terms:
        count += 1
        e = int(e)
        if e < 1:
            raise SpexError(f"exponents must be >= 1, got {e}")
        if e > MAX_INT:
            raise SpexError(f"exponent {e} exceeds 2^63-1")
        merged[e] = (merged.get(e, 0) + int(a)) % q
    if count == 0:
        raise SpexError("empty term list")
    kept = tuple((a, e) for e, a in sorted(merged.items()) if a != 0)
    if not kept:
        raise SpexError(f"all coefficients vanish modulo {q}")
    g = q
    for a, _ in kept:
        g = math.gcd(g, a)
    if g != 1:
        raise SpexError(f"gcd of coefficients and modulus is {g}, expected 1")
    return SparsePolynomial(q, kept)


def evaluate(f: SparsePolynomial, x: int) -> int:
    q = f.q
    return sum(a * pow(x, e, q) for a, e in f.terms) % q


def scale(f: SparsePolynomial, lam: int, q: int | None = None) -> SparsePolynomial:
    """``lam * f`` reduced modulo q (default: f's modulus)."""
    q = f.q if q is None else q
    return make_poly(q, [(lam * a, e) for a, e in f.terms])


def reduce_exponents_prime(f: SparsePolynomial) -> SparsePolynomial:
    """Fold exponents into [1, p-1]; agrees with f on every unit of F_p."""
    p = f.q
    if not is_prime(p):
        raise SpexError(f"exponent reduction needs a prime modulus, got {p}")
    return make_poly(p, [(a, (e - 1) % (p - 1) + 1) for a, e in f.terms])


def derivative_split(f: SparsePolynomial, p: int) -> tuple[int, list[tuple[int, int]]]:
    """Write ``f'(X) = p**u * sum b_i X**(e_i - 1)`` with gcd(b_1..b_r, p) = 1.

    Coefficients are taken as integers in [0, q) and differentiated over Z.
    Returns ``(u, [(b_i, e_i - 1), ...])``.
    """
    q = f.q
    m = 0
    rest = q
    while rest % p == 0:
        rest //= p
        m += 1
    if rest != 1 or m == 0:
        raise SpexError(f"modulus {q} is not a power of {p}")
    derived = [(a * e, e - 1) for a, e in f.terms]
    if all(c == 0 for c, _ in derived):
        raise SpexError("derivative vanishes identically")
    u = min(valuation(c, p) for c, _ in derived if c != 0)
    scale_ = p**u
    return u, [(c // scale_, k) for c, k in derived]


# -- text / JSON forms -------------------------------------------------------

_TERM = re.compile(
    r"""^\s*(?P<coef>\d+)?\s*(?:\*?\s*(?P<x>x)\s*(?:\^\s*(?P<exp>\d+))?)?\s*$""",
    re.IGNORECASE,
)


def parse_poly(text: str, q: int | None = None) -> SparsePolynomial:
    """Parse ``"a1*x^e1 + a2*x^e2 mod q"`` or the JSON form ``{"q": .., "terms": [[a, e], ..]}``."""
    text = text.strip()
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpexError(f"bad polynomial JSON: {exc}") from None
        qq = doc.get("q", q)
        if qq is None:
            raise SpexError("polynomial JSON lacks 'q'")
        return make_poly(int(qq), [(int(a), int(e)) for a, e in doc["terms"]])
    body = text
    mod = re.search(r"\bmod\s*(\d+)\s*$", text, re.IGNORECASE)
    if mod:
        body = text[: mod.start()]
        q_text = int(mod.group(1))
        if q is not None and q != q_text:
            raise SpexError(f"modulus mismatch: --q {q} but polynomial says mod {q_text}")
        q = q_text
    if q is None:
        raise SpexError("modulus not given")
    terms = []
    for sign, chunk in re.findall(r"([+-]?)\s*([^+-]+)", body):
        m = _TERM.match(chunk)
        if not m or (m.group("coef") is None and m.group("x") is None):
            raise SpexError(f"cannot parse term {chunk!r}")
        coef = int(m.group("coef")) if m.group("coef") is not None else 1
        if m.group("x") is None:
            raise SpexError(f"constant term {chunk!r} not allowed (exponents must be >= 1)")
        exp = int(m.group("exp")) if m.group("exp") is not None else 1
        terms.append((-coef if sign == "-" else coef, exp))
    if not terms:
        raise SpexError(f"no terms in {text!r}")
    return make_poly(q, terms)


def format_poly(f: SparsePolynomial) -> str:
    body = " + ".join(f"{a}*x^{e}" for a, e in f.terms)
    return f"{body} mod {f.q}"


# -- admissibility conditions ------------------------------------------------


@dataclass(frozen=True)
class Comparison:
    """One inequality ``value <= threshold`` (or ``value == threshold`` when exact)."""

    label: str
    indices: tuple[int, ...]
    value: int
    threshold: float
    passed: bool
    boundary: bool = False
    exact: bool = False

    def recheck(self) -> bool:
        if self.exact:
            return self.value == self.threshold
        return self.value <= self.threshold or abs(self.value - self.threshold) < BOUNDARY_RTOL * self.threshold


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    p: int
    comparisons: tuple[Comparison, ...] = field(default_factory=tuple)
    note: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons)

    @property
    def boundary(self) -> bool:
        return any(c.boundary for c in self.comparisons)

    def failures(self) -> list[Comparison]:
        return [c for c in self.comparisons if not c.passed]

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "p": self.p,
            "passed": self.passed,
            "boundary": self.boundary,
            "note": self.note,
            "comparisons": [
                {
                    "label": c.label,
                    "indices": list(c.indices),
                    "value": c.value,
                    "threshold": c.threshold,
                    "passed": c.passed,
                    "boundary": c.boundary,
                }
                for c in self.comparisons
            ],
        }


def power_threshold(p: int, alpha: Fraction, factor: float = 1.0) -> float:
    return factor * float(p) ** float(alpha)


def compare(label: str, indices: tuple[int, ...], value: int, threshold: float) -> Comparison:
    if value <= threshold:
        return Comparison(label, indices, value, threshold, True, abs(value - threshold) < BOUNDARY_RTOL * threshold)
    if abs(value - threshold) < BOUNDARY_RTOL * threshold:
        return Comparison(label, indices, value, threshold, True, True)
    return Comparison(label, indices, value, threshold, False)


def _exponents(f: SparsePolynomial | Sequence[int]) -> tuple[int, ...]:
    if isinstance(f, SparsePolynomial):
        return f.exponents
    return tuple(int(e) for e in f)


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise SpexError(f"{p} is not prime")


def three_family_report(condition: str, exps: Sequence[int], p: int, single_alpha: Fraction, single_factor: float,
                        diff_alpha: Fraction, triple_alpha: Fraction, note: str = "") -> ConditionReport:
    """Shared shape of every condition set: single gcds, difference gcds, pair gcds."""
    n = p - 1
    t_single = power_threshold(p, single_alpha, single_factor)
    t_diff = power_threshold(p, diff_alpha)
    t_triple = power_threshold(p, triple_alpha)
    comps = [compare("gcd(e_i, p-1)", (i,), math.gcd(e, n), t_single) for i, e in enumerate(exps)]
    for i, j in combinations(range(len(exps)), 2):
        comps.append(compare("gcd(e_i - e_j, p-1)", (i, j), math.gcd(exps[i] - exps[j], n), t_diff))
    for i, j in combinations(range(len(exps)), 2):
        comps.append(compare("gcd(e_i, e_j, p-1)", (i, j), math.gcd(math.gcd(exps[i], exps[j]), n), t_triple))
    return ConditionReport(condition, p, tuple(comps), note)


def kappa_thresholds(eps: Fraction) -> tuple[Fraction, Fraction, Fraction]:
    """Exponents of the three thresholds attached to the saving kappa_r(eps)."""
    return (
        Fraction(7, 26) + Fraction(14, 13) * eps,
        Fraction(8, 13) + Fraction(32, 13) * eps,
        Fraction(3, 26) - Fraction(46, 13) * eps,
    )


def check_kappa_conditions(f: SparsePolynomial | Sequence[int], p: int, eps=MAX_EPSILON) -> ConditionReport:
    """Conditions under which S_p(f) << p**(1 - kappa_r(eps)).

    For all i != j: gcd(e_i, p-1) <= 0.5 p^(7/26 + 14eps/13),
    gcd(e_i - e_j, p-1) <= p^(8/13 + 32eps/13), gcd(e_i, e_j, p-1) <= p^(3/26 - 46eps/13).
    The factor 0.5 is used as stated.
    """
    eps = Fraction(eps)
    if not 0 < eps <= MAX_EPSILON:
        raise SpexError(f"epsilon must lie in (0, 3/92], got {eps}")
    _check_prime(p)
    a1, a2, a3 = kappa_thresholds(eps)
    return three_family_report(f"kappa(eps={eps})", _exponents(f), p, a1, 0.5, a2, a3)


def check_rho_conditions(f: SparsePolynomial | Sequence[int], p: int) -> ConditionReport:
    """gcd(e_i, p-1) = 1 for all i and gcd(e_i - e_j, p-1) <= p^(16/23) for i != j."""
    _check_prime(p)
    exps = _exponents(f)
    n = p - 1
    comps = [Comparison("gcd(e_i, p-1) == 1", (i,), math.gcd(e, n), 1.0, math.gcd(e, n) == 1, exact=True)
             for i, e in enumerate(exps)]
    t_diff = power_threshold(p, Fraction(16, 23))
    for i, j in combinations(range(len(exps)), 2):
        comps.append(compare("gcd(e_i - e_j, p-1)", (i, j), math.gcd(exps[i] - exps[j], n), t_diff))
    return ConditionReport("rho", p, tuple(comps))


def check_composite_conditions(f: SparsePolynomial | Sequence[int], p: int) -> ConditionReport:
    """The three prime-level conditions used when splitting a composite modulus.

    gcd(e_j, p-1) <= p^(1/4), gcd(e_i - e_j, p-1) <= p^(3/5), gcd(e_i, e_j, p-1) <= p^(3/52).
    """
    _check_prime(p)
    return three_family_report("composite", _exponents(f), p, Fraction(1, 4), 1.0, Fraction(3, 5), Fraction(3, 52))


def check_prime_power_condition(f: SparsePolynomial | Sequence[int], p: int, m: int) -> ConditionReport:
    """gcd(e_i, p**m) <= p**(m/3) for all i."""
    if m < 2:
        raise SpexError(f"prime-power condition needs m >= 2, got {m}")
    _check_prime(p)
    pm = p**m
    thr = power_threshold(p, Fraction(m, 3))
    comps = tuple(compare("gcd(e_i, p^m)", (i,), math.gcd(e, pm), thr) for i, e in enumerate(_exponents(f)))
    return ConditionReport(f"prime_power(m={m})", p, comps)


def difference_gcd(f: SparsePolynomial | Sequence[int], p: int) -> tuple[int, bool]:
    """D = max_{i != j} gcd(e_i - e_j, p - 1).

    For a monomial the maximum is empty; gcd(e_1, p-1) is returned instead and
    the second value is True to flag the convention.
    """
    exps = _exponents(f)
    if len(exps) == 1:
        return math.gcd(exps[0], p - 1), True
    return max(math.gcd(a - b, p - 1) for a, b in combinations(exps, 2)), False
