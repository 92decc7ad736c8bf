"""The power generator u_n = u_{n-1}^e mod p and its multivariate variants.

With u_0 = theta of multiplicative order T, u_n = theta^(e^n mod T), so the
period structure of (u_n) is that of the exponent orbit k -> e k mod T.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterator, Sequence

import numpy as np

from .arith import divisors, factorize, is_prime, multiplicative_order, unit_orders
from .errors import SpexError
from .rng import SplitMix64


def floyd_cycle(step: Callable, x0) -> tuple[int, int]:
    """(preperiod, period) of the orbit x0, step(x0), ... by Floyd's tortoise and hare."""
    tortoise = step(x0)
    hare = step(step(x0))
    while tortoise != hare:
        tortoise = step(tortoise)
        hare = step(step(hare))
    mu = 0
    tortoise = x0
    while tortoise != hare:
        tortoise = step(tortoise)
        hare = step(hare)
        mu += 1
    lam = 1
    hare = step(tortoise)
    while tortoise != hare:
        hare = step(hare)
        lam += 1
    return mu, lam


@dataclass(frozen=True)
class GeneratorSpec:
    p: int
    e: int
    theta: int
    T: int  # order of theta mod p
    preperiod: int
    tau: int  # period of (u_n)

    @property
    def purely_periodic(self) -> bool:
        return math.gcd(self.e, self.T) == 1


def make_generator(p: int, e: int, theta: int) -> GeneratorSpec:
    if not is_prime(p):
        raise SpexError(f"{p} is not prime")
    if e < 2:
        raise SpexError(f"exponent e must be >= 2, got {e}")
    theta %= p
    if theta == 0:
        raise SpexError("the seed must be non-zero modulo p")
    T = multiplicative_order(theta, p)
    if T == 1:
        return GeneratorSpec(p, e, theta, 1, 0, 1)
    if math.gcd(e, T) == 1:
        return GeneratorSpec(p, e, theta, T, 0, multiplicative_order(e, T))
    mu, lam = floyd_cycle(lambda k: k * e % T, 1)
    return GeneratorSpec(p, e, theta, T, mu, lam)


def nth_term(g: GeneratorSpec, n: int) -> int:
    """u_n = theta^(e^n mod T) mod p; negative n only for a purely periodic sequence."""
    if n < 0:
        if not g.purely_periodic:
            raise SpexError("negative indices need gcd(e, T) = 1")
        if g.T == 1:
            return g.theta
        return pow(g.theta, pow(g.e, n, g.T), g.p)
    return pow(g.theta, pow(g.e, n, g.T), g.p)


def sequence(g: GeneratorSpec, n_terms: int, start: int = 0) -> list[int]:
    """u_start, ..., u_{start + n_terms - 1} by direct iteration."""
    u = nth_term(g, start)
    out = []
    for _ in range(n_terms):
        out.append(u)
        u = pow(u, g.e, g.p)
    return out


# -- order inequalities ------------------------------------------------------


@dataclass
class OrderLemmaReport:
    q_max: int
    h_max: int
    checked_divisor_orders: int = 0
    checked_gcd_powers: int = 0
    checked_residue_counts: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def to_json(self) -> dict:
        return {
            "q_max": self.q_max,
            "h_max": self.h_max,
            "checked_divisor_orders": self.checked_divisor_orders,
            "checked_gcd_powers": self.checked_gcd_powers,
            "checked_residue_counts": self.checked_residue_counts,
            "counterexamples": self.counterexamples[:20],
            "passed": self.passed,
        }


def verify_order_lemmas(q_max: int, h_max: int = 20, k_max: int = 48, seed: int = 0,
                        m_samples: int = 2) -> OrderLemmaReport:
    """Exhaustive check of three inequalities on multiplicative orders.

    For every 2 <= q <= q_max and e coprime to q, with tau_n the order of e mod n:
      * tau_r >= (r / q) tau_q for every divisor r of q;
      * gcd(e^h - 1, q) <= h q / tau_q for 1 <= h <= h_max;
      * for sampled m >= 0, every K <= k_max and every divisor r, the number of
        k in [1, K] with gcd(e^k - e^m, q) = r is at most q K / (r tau_q) + 1.
    All comparisons are cleared of denominators and exact.
    """
    if q_max > 10**4:
        raise SpexError("order checks are exhaustive and limited to q_max <= 10^4")
    rng = SplitMix64(seed)
    report = OrderLemmaReport(q_max, h_max)
    orders = {1: np.ones(1, dtype=np.int64)}
    for q in range(2, q_max + 1):
        orders[q] = unit_orders(q)
    for q in range(2, q_max + 1):
        ords = orders[q]
        e = np.nonzero(ords)[0].astype(np.int64)
        tau_q = ords[e]
        divs = divisors(factorize(q))
        for r in divs:
            tau_r = orders[r][e % r] if r > 1 else np.ones_like(e)
            bad = q * tau_r < r * tau_q
            report.checked_divisor_orders += e.size
            for idx in np.nonzero(bad)[0][:3]:
                report.counterexamples.append({"check": "divisor_order", "q": q, "e": int(e[idx]), "r": r})
        power = np.ones_like(e)
        for h in range(1, h_max + 1):
            power = power * e % q
            g = np.gcd(power - 1, q)
            bad = g * tau_q > h * q
            report.checked_gcd_powers += e.size
            for idx in np.nonzero(bad)[0][:3]:
                report.counterexamples.append({"check": "gcd_power", "q": q, "e": int(e[idx]), "h": h})
        ks = np.arange(1, k_max + 1)
        powers = np.ones((e.size, k_max + 1), dtype=np.int64)
        for k in range(1, k_max + 1):
            powers[:, k] = powers[:, k - 1] * e % q
        for _ in range(m_samples):
            m = rng.randbelow(k_max + 1)
            g = np.gcd((powers[:, 1:] - powers[:, m : m + 1]) % q, q)  # shape (units, k_max)
            for r in divs:
                counts = np.cumsum(g == r, axis=1)  # counts[:, K-1] for K = 1..k_max
                bad = counts * r * tau_q[:, None] > q * ks[None, :] + r * tau_q[:, None]
                report.checked_residue_counts += counts.size
                for idx in np.argwhere(bad)[:3]:
                    report.counterexamples.append({"check": "residue_count", "q": q, "e": int(e[idx[0]]),
                                                   "m": m, "K": int(idx[1]) + 1, "r": r})
    return report


# -- multivariate systems ----------------------------------------------------

Monomial = tuple[int, tuple[int, ...]]  # (coefficient, exponent vector)


def _eval_poly(terms: Sequence[Monomial], xs: Sequence[int], p: int) -> int:
    total = 0
    for c, exps in terms:
        term = c
        for x, k in zip(xs, exps):
            term = term * pow(x, k, p) % p
        total += term
    return total % p


def _eval_linear(form: Sequence[int], xs: Sequence[int], p: int) -> int:
    """form = (constant, c_2, ..., c_m) applied to (x_2, ..., x_m)."""
    return (form[0] + sum(c * x for c, x in zip(form[1:], xs))) % p


@dataclass(frozen=True)
class MultivariateSystem:
    """A polynomial map F_p^m -> F_p^m of one of three structured kinds.

    kind "shifted": F_i = (X_i - h_i)^e_i G_i(X_{i+1}, .., X_m) + h_i for i < m and
        F_m = g_m (X_m - h_m)^e_m + h_m, with no G_i vanishing on F_p.
    kind "linear": F_1 = X_1^e L_1 + L_0 and F_i = L'_i for i >= 2, all linear
        forms being non-constant in X_2..X_m.
    kind "monomial": F_j = prod_k X_k^(E[j][k]) for a triangular integer matrix E.
    """

    kind: str
    p: int
    m: int
    params: dict

    def step(self, u: Sequence[int]) -> tuple[int, ...]:
        p, m = self.p, self.m
        if self.kind == "monomial":
            rows = self.params["matrix"]
            out = []
            for row in rows:
                v = 1
                for x, k in zip(u, row):
                    v = v * pow(x, k, p) % p
                out.append(v)
            return tuple(out)
        if self.kind == "linear":
            e = self.params["e"]
            rest = u[1:]
            first = (pow(u[0], e, p) * _eval_linear(self.params["L1"], rest, p)
                     + _eval_linear(self.params["L0"], rest, p)) % p
            return (first,) + tuple(_eval_linear(F, rest, p) for F in self.params["F"])
        exps, shifts, G, g_m = (self.params[k] for k in ("exponents", "shifts", "G", "g_m"))
        out = []
        for i in range(m - 1):
            v = pow((u[i] - shifts[i]) % p, exps[i], p) * _eval_poly(G[i], u[i + 1 :], p) + shifts[i]
            out.append(v % p)
        out.append((g_m * pow((u[m - 1] - shifts[m - 1]) % p, exps[m - 1], p) + shifts[m - 1]) % p)
        return tuple(out)


ZERO_CHECK_LIMIT = 10**3
ZERO_CHECK_POINTS = 10**7


def _is_triangular(mat: Sequence[Sequence[int]]) -> bool:
    m = len(mat)
    lower = all(mat[i][j] == 0 for i in range(m) for j in range(i + 1, m))
    upper = all(mat[i][j] == 0 for i in range(m) for j in range(i))
    return lower or upper


def make_multivariate(kind: str, p: int, params: dict, assume_zero_free: bool = False) -> MultivariateSystem:
    """Validate parameters for one of the three system kinds.

    For "shifted" systems the zero-freeness of every G_i is verified by
    exhaustion when p <= 1000 and the search space is at most 10^7 points;
    otherwise ``assume_zero_free=True`` must be passed.
    """
    if not is_prime(p):
        raise SpexError(f"{p} is not prime")
    if kind == "monomial":
        mat = [[int(x) for x in row] for row in params["matrix"]]
        m = len(mat)
        if m < 1 or any(len(row) != m for row in mat):
            raise SpexError("exponent matrix must be square")
        if any(x < 0 for row in mat for x in row):
            raise SpexError("exponents must be non-negative")
        if not _is_triangular(mat):
            raise SpexError("exponent matrix must be triangular")
        return MultivariateSystem(kind, p, m, {"matrix": tuple(tuple(r) for r in mat)})
    if kind == "linear":
        e = int(params["e"])
        F = [tuple(int(c) % p for c in form) for form in params["F"]]
        m = len(F) + 1
        if m < 2:
            raise SpexError("linear systems need m >= 2")
        L0 = tuple(int(c) % p for c in params["L0"])
        L1 = tuple(int(c) % p for c in params["L1"])
        for name, form in [("L0", L0), ("L1", L1)] + [(f"F{i + 2}", f) for i, f in enumerate(F)]:
            if len(form) != m:
                raise SpexError(f"{name} needs a constant and {m - 1} coefficients")
            if not any(form[1:]):
                raise SpexError(f"{name} must be non-constant in X_2..X_m")
        if e < 1:
            raise SpexError("exponent must be >= 1")
        return MultivariateSystem(kind, p, m, {"e": e, "L0": L0, "L1": L1, "F": tuple(F)})
    if kind == "shifted":
        exps = tuple(int(x) for x in params["exponents"])
        shifts = tuple(int(x) % p for x in params["shifts"])
        m = len(exps)
        G = tuple(tuple((int(c) % p, tuple(int(k) for k in ks)) for c, ks in Gi) for Gi in params.get("G", []))
        g_m = int(params["g_m"]) % p
        if m < 1 or len(shifts) != m or len(G) != m - 1:
            raise SpexError("need m exponents, m shifts and m-1 polynomials G_i")
        if any(x < 1 for x in exps):
            raise SpexError("exponents must be >= 1")
        if g_m == 0:
            raise SpexError("g_m must be non-zero")
        for i, Gi in enumerate(G):
            nvars = m - i - 1
            if not Gi or any(len(ks) != nvars for _, ks in Gi):
                raise SpexError(f"G_{i + 1} must be a non-empty polynomial in {nvars} variables")
            if assume_zero_free:
                continue
            if p > ZERO_CHECK_LIMIT or p**nvars > ZERO_CHECK_POINTS:
                raise SpexError(f"zero-freeness of G_{i + 1} cannot be checked exhaustively; "
                                "pass assume_zero_free=True to assert it")
            for xs in product(range(p), repeat=nvars):
                if _eval_poly(Gi, xs, p) == 0:
                    raise SpexError(f"G_{i + 1} vanishes at {xs}")
        return MultivariateSystem(kind, p, m, {"exponents": exps, "shifts": shifts, "G": G, "g_m": g_m,
                                               "assumed_zero_free": assume_zero_free})
    raise SpexError(f"unknown system kind {kind!r}")


def iterate(system: MultivariateSystem, u0: Sequence[int], n_terms: int) -> list[tuple[int, ...]]:
    if len(u0) != system.m:
        raise SpexError(f"initial vector must have {system.m} entries")
    u = tuple(int(x) % system.p for x in u0)
    out = []
    for _ in range(n_terms):
        out.append(u)
        u = system.step(u)
    return out


def orbit_cycle(system: MultivariateSystem, u0: Sequence[int]) -> tuple[int, int]:
    """(preperiod, period) of the orbit of u0."""
    return floyd_cycle(system.step, tuple(int(x) % system.p for x in u0))


def iter_orbit(system: MultivariateSystem, u0: Sequence[int]) -> Iterator[tuple[int, ...]]:
    u = tuple(int(x) % system.p for x in u0)
    while True:
        yield u
        u = system.step(u)


def warn_if_beyond_period(g: GeneratorSpec, n_points: int) -> None:
    if n_points > g.preperiod + g.tau:
        warnings.warn(f"{n_points} points exceed preperiod + period = {g.preperiod + g.tau}; points repeat",
                      stacklevel=3)
