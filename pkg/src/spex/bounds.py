"""Exact saving exponents for sparse exponential sums.

kappa_1 = kappa_2 = eps and, for r >= 3,
    t_r = ceil((r - 2 - eps) / (2 kappa_{r-1})) + 2,   kappa_r = eps / t_r.
rho_r = kappa_r(3/92) and sigma_r = min(kappa_r(3/184), 1 / (50 r^3)).
Everything is a Fraction; decimal input is read as an exact decimal fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import SpexError

EPS_MAX = Fraction(3, 92)
RHO_EPS = Fraction(3, 92)
SIGMA_EPS = Fraction(3, 184)
R_MAX = 64


def parse_epsilon(text) -> Fraction:
    """``"3/92"``, ``"0.03"`` or a number, read exactly."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        raise SpexError("pass epsilon as a string or Fraction, floats are inexact")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise SpexError(f"cannot read {text!r} as an exact rational") from None


def _check(r: int, eps: Fraction) -> None:
    if r < 1:
        raise SpexError(f"r must be >= 1, got {r}")
    if r > R_MAX:
        raise SpexError(f"r = {r} exceeds the supported maximum {R_MAX}")
    if not 0 < eps <= EPS_MAX:
        raise SpexError(f"epsilon must lie in (0, 3/92], got {eps}")


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


@lru_cache(maxsize=None)
def _kappa_chain(eps: Fraction, r: int) -> tuple[tuple[int | None, Fraction], ...]:
    rows: list[tuple[int | None, Fraction]] = [(None, eps), (None, eps)]
    for k in range(3, r + 1):
        prev = rows[-1][1]
        t = _ceil((k - 2 - eps) / (2 * prev)) + 2
        rows.append((t, eps / t))
    return tuple(rows[:r])


def t_value(r: int, eps) -> int | None:
    """t_r(eps); None for r = 1, 2 where no recursion step is taken."""
    eps = parse_epsilon(eps)
    _check(r, eps)
    return _kappa_chain(eps, r)[r - 1][0]


def kappa(r: int, eps) -> Fraction:
    eps = parse_epsilon(eps)
    _check(r, eps)
    return _kappa_chain(eps, r)[r - 1][1]


def rho(r: int) -> Fraction:
    return kappa(r, RHO_EPS)


def sigma(r: int) -> tuple[Fraction, str]:
    """(sigma_r, branch) with branch "kappa" or "cubic" naming the smaller term."""
    k = kappa(r, SIGMA_EPS)
    cubic = Fraction(1, 50 * r**3)
    if k <= cubic:
        return k, "kappa"
    return cubic, "cubic"


@dataclass(frozen=True)
class BoundRow:
    r: int
    t: int | None
    kappa: Fraction
    rho: Fraction | None = None
    sigma: Fraction | None = None
    sigma_branch: str | None = None


@dataclass(frozen=True)
class BoundTable:
    epsilon: Fraction
    rows: tuple[BoundRow, ...]

    def row(self, r: int) -> BoundRow:
        return self.rows[r - 1]

    def to_json(self) -> dict:
        out = []
        for row in self.rows:
            item = {"r": row.r, "t": row.t, "kappa": str(row.kappa)}
            if row.rho is not None:
                item["rho"] = str(row.rho)
            if row.sigma is not None:
                item["sigma"] = str(row.sigma)
                item["sigma_branch"] = row.sigma_branch
            out.append(item)
        return {"epsilon": str(self.epsilon), "rows": out}


def bound_table(eps, r_max: int, derived: bool = False) -> BoundTable:
    eps = parse_epsilon(eps)
    _check(r_max, eps)
    chain = _kappa_chain(eps, r_max)
    rows = []
    for r, (t, k) in enumerate(chain, start=1):
        if derived:
            s, branch = sigma(r)
            rows.append(BoundRow(r, t, k, rho(r), s, branch))
        else:
            rows.append(BoundRow(r, t, k))
    return BoundTable(eps, tuple(rows))


def induction_slack(r: int, eps) -> Fraction:
    """2 (t_r - 2) kappa_{r-1} - (r - 2 - eps); non-negative for every r >= 3."""
    eps = parse_epsilon(eps)
    if r < 3:
        raise SpexError("the recursion step starts at r = 3")
    return 2 * (t_value(r, eps) - 2) * kappa(r - 1, eps) - (r - 2 - eps)

