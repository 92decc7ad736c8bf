"""Brute-force solution counts for the power-sum system over F_p^*.

I_{r,t} counts (x_1..x_t, y_1..y_t) in (F_p^*)^(2t) with
sum_k x_k^e_i = sum_k y_k^e_i for every i. J_{r,t}(lambda) counts x-tuples
with a_i (x_1^e_i + ... + x_t^e_i) = lambda_i. Both are computed from the
same fingerprint enumeration over (F_p^*)^t; lambda vectors are keyed as
base-p integers ``sum_i lambda_i p^(i-1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import config
from .arith import is_prime, powmod_array
from .bounds import parse_epsilon
from .errors import BudgetExceeded, SpexError
from .poly import ConditionReport, check_rho_conditions, kappa_thresholds, three_family_report


def _validate(exps: Sequence[int], t: int, p: int) -> None:
    if not is_prime(p):
        raise SpexError(f"{p} is not prime")
    if len(exps) < 1 or t < 1:
        raise SpexError("need r >= 1 equations and t >= 1 variables per side")
    if any(e < 1 for e in exps):
        raise SpexError("exponents must be >= 1")
    if p ** len(exps) > 2**62:
        raise SpexError("p^r too large for packed lambda keys")


def _power_table(exps: Sequence[int], p: int) -> np.ndarray:
    x = np.arange(1, p, dtype=np.int64)
    return np.stack([powmod_array(x, e % (p - 1), p) for e in exps])


def _fingerprints(coeffs: Sequence[int], exps: Sequence[int], t: int, p: int) -> np.ndarray:
    """Packed lambda key of every x-tuple in (F_p^*)^t, in lexicographic tuple order."""
    table = _power_table(exps, p)
    keys = np.zeros(1, dtype=np.int64)
    for i, a in enumerate(coeffs):
        sums = np.zeros(1, dtype=np.int64)
        for _ in range(t):
            sums = ((sums[:, None] + table[i][None, :]) % p).ravel()
        keys = keys + (a % p) * sums % p * p**i
    return keys


def count_I(exps: Sequence[int], t: int, p: int, budget: int | None = None) -> int:
    _validate(exps, t, p)
    work = (p - 1) ** (2 * t)
    limit = config.budget("count_I", budget)
    if work > limit:
        raise BudgetExceeded("solution count I_{r,t}", work, limit)
    _, counts = np.unique(_fingerprints([1] * len(exps), exps, t, p), return_counts=True)
    return int(np.sum(counts.astype(object) ** 2))


def J_distribution(coeffs: Sequence[int], exps: Sequence[int], t: int, p: int,
                   budget: int | None = None) -> dict[int, int]:
    """Non-zero fibre counts J(lambda), keyed by packed lambda, in increasing key order."""
    _validate(exps, t, p)
    if len(coeffs) != len(exps):
        raise SpexError("one coefficient per exponent")
    if any(a % p == 0 for a in coeffs):
        raise SpexError("coefficients must be non-zero modulo p")
    work = (p - 1) ** t
    limit = config.budget("J_distribution", budget)
    if work > limit:
        raise BudgetExceeded("fibre distribution J_{r,t}", work, limit)
    keys, counts = np.unique(_fingerprints(coeffs, exps, t, p), return_counts=True)
    return {int(k): int(c) for k, c in zip(keys, counts)}


def unpack_lambda(key: int, p: int, r: int) -> tuple[int, ...]:
    out = []
    for _ in range(r):
        key, digit = divmod(key, p)
        out.append(digit)
    return tuple(out)


def orthogonality_value(exps: Sequence[int], t: int, p: int) -> float:
    """p^-r sum over lambda in F_p^r of |sum_{z in F_p^*} e_p(sum lambda_i z^e_i)|^(2t)."""
    r = len(exps)
    table = _power_table(exps, p)  # r x (p-1)
    lambdas = np.stack(np.meshgrid(*[np.arange(p, dtype=np.int64)] * r, indexing="ij"), axis=-1).reshape(-1, r)
    phases = (lambdas @ table) % p  # p^r x (p-1), entries < r p^2
    sums = np.exp(2j * np.pi * phases / p).sum(axis=1)
    return float(np.sum(np.abs(sums) ** (2 * t)) / p**r)


@dataclass(frozen=True)
class MomentReport:
    p: int
    exps: tuple[int, ...]
    coeffs: tuple[int, ...]
    t: int
    I_rt: int
    sum_J: int
    sum_J_sq: int
    orthogonality_value: float

    @property
    def identities_hold(self) -> bool:
        return (self.sum_J == (self.p - 1) ** self.t and self.sum_J_sq == self.I_rt
                and abs(self.orthogonality_value - self.I_rt) <= 1e-6 * self.I_rt)

    def csv_row(self) -> list:
        return [self.p, len(self.exps), self.t, ";".join(map(str, self.exps)), self.I_rt, self.sum_J,
                self.sum_J_sq, repr(self.orthogonality_value)]


CSV_HEADER = ["p", "r", "t", "exponents", "I", "sumJ", "sumJsq", "orth"]


def verify_moments(coeffs: Sequence[int], exps: Sequence[int], t: int, p: int,
                   budget: int | None = None) -> MomentReport:
    limit = config.budget("moments", budget)
    work = p ** len(exps) * (p - 1)
    if work > limit:
        raise BudgetExceeded("orthogonality sum", work, limit)
    dist = J_distribution(coeffs, exps, t, p, budget)
    I = count_I(exps, t, p, budget)
    counts = list(dist.values())
    return MomentReport(p, tuple(exps), tuple(coeffs), t, I, sum(counts), sum(c * c for c in counts),
                        orthogonality_value(exps, t, p))


@dataclass(frozen=True)
class FourthMomentReport:
    """Condition reports for the two I_{2,2} estimates with constant-free reference values."""

    eps_report: ConditionReport
    coprime_report: ConditionReport
    eps_reference: float  # p^(3 - 4 eps)
    coprime_reference: float  # p^(3 - 3/23)


def check_fourth_moment_conditions(exps: Sequence[int], p: int, eps="3/92") -> FourthMomentReport:
    if len(exps) != 2:
        raise SpexError("the fourth-moment conditions are stated for r = 2")
    eps = parse_epsilon(eps)
    if eps <= 0:
        raise SpexError("epsilon must be positive")
    if not is_prime(p):
        raise SpexError(f"{p} is not prime")
    a1, a2, a3 = kappa_thresholds(eps)
    eps_rep = three_family_report(f"fourth_moment(eps={eps})", list(exps), p, a1, 0.5, a2, a3)
    cop = check_rho_conditions(list(exps), p)
    return FourthMomentReport(eps_rep, cop, float(p) ** float(3 - 4 * eps), float(p) ** float(3 - Fraction(3, 23)))
