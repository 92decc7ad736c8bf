"""Discrepancy of finite point sets in [0,1)^s.

D(G) = sup_B |#(G in B)/N - vol(B)| over half-open boxes B = prod [a_j, b_j)
(extreme discrepancy) or over anchored boxes prod [0, b_j) (star discrepancy).

Exact mode: the supremum of count/N - vol is the limit over closed boxes
[lo, hi] and that of vol - count/N the limit over open boxes (lo, hi), with
every lo in {0} u coordinates and every hi in coordinates u {1}. Both sides are
enumerated over those critical corners.

Grid mode: all boxes with corners on the lattice (1/G) Z^s are evaluated
exactly from a prefix-summed histogram. That is a valid lower bound; moving each
face of an arbitrary box to the lattice changes its volume by at most 1/G per
face, giving the certified upper bound lower + s/G (star) or lower + 2s/G
(extreme, two moving faces per axis).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import NamedTuple, Sequence

import numpy as np

from . import config
from .bounds import rho
from .errors import BudgetExceeded, SpexError
from .powgen import GeneratorSpec, MultivariateSystem, iterate, sequence

DEFAULT_GRID = 256
ROW_BLOCK = 512
SHAPE = "shape only; implied constant and p^o(1) factor unknown"


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray  # shape (N, s)
    provenance: str = "external"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise SpexError("a point set needs N >= 1 points of dimension s >= 1")
        if not np.all((pts >= 0.0) & (pts < 1.0)):
            raise SpexError("every coordinate must lie in [0, 1)")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def s(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_csv(cls, path: str) -> "PointSet":
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
        except OSError as exc:
            raise SpexError(f"{path}: {exc}") from None
        except ValueError as exc:
            raise SpexError(f"{path}: malformed point file ({exc})") from None
        return cls(data, f"external({path})")


def build_points_powgen(g: GeneratorSpec, s: int, n_points: int,
                        shifts: Sequence[int] | None = None) -> PointSet:
    """Points (u_{n+d_1}/p, ..., u_{n+d_s}/p) for n = 1..N, with shifts d = (0, 1, .., s-1) by default."""
    if s < 1 or n_points < 1:
        raise SpexError("need s >= 1 and N >= 1")
    shifts = tuple(range(s)) if shifts is None else tuple(int(d) for d in shifts)
    if len(shifts) != s or min(shifts) < 0:
        raise SpexError(f"need {s} non-negative shifts")
    if n_points > g.preperiod + g.tau:
        warnings.warn(f"N = {n_points} exceeds preperiod + period = {g.preperiod + g.tau}; points repeat",
                      stacklevel=2)
    seq = np.array(sequence(g, n_points + max(shifts), start=1), dtype=np.float64)
    pts = np.stack([seq[d : d + n_points] for d in shifts], axis=1) / g.p
    tag = f"powgen(p={g.p},e={g.e},theta={g.theta},s={s},N={n_points}"
    tag += f",shifts={list(shifts)})" if shifts != tuple(range(s)) else ")"
    return PointSet(pts, tag)


def build_points_multivariate(system: MultivariateSystem, u0: Sequence[int], s: int, n_points: int) -> PointSet:
    """Concatenated vectors (u_n, ..., u_{n+s-1}) / p in [0,1)^(m s) for n = 1..N."""
    orbit = np.array(iterate(system, u0, n_points + s), dtype=np.float64) / system.p
    pts = np.concatenate([orbit[1 + j : 1 + j + n_points] for j in range(s)], axis=1)
    return PointSet(pts, f"multivariate(kind={system.kind},p={system.p},m={system.m},s={s},N={n_points})")


@dataclass(frozen=True)
class DiscrepancyReport:
    kind: str  # "star" | "extreme"
    lower: float
    upper: float
    method: str  # "exact-critical" | "grid-<G>"
    convention: str  # "half-open" | "boundary-inside"
    n: int
    s: int
    work: int
    provenance: str = "external"

    @property
    def exact(self) -> bool:
        return self.method == "exact-critical"

    @property
    def value(self) -> float:
        """The exact value, or the midpoint of a grid bracket."""
        return self.lower if self.exact else 0.5 * (self.lower + self.upper)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "method": self.method, "convention": self.convention, "N": self.n,
               "s": self.s, "lower": self.lower, "upper": self.upper, "work": self.work,
               "provenance": self.provenance}
        if self.exact:
            out["value"] = self.lower
        return out


# -- exact -------------------------------------------------------------------


def _exact_1d(x: np.ndarray, star: bool, boundary_inside: bool) -> float:
    n = x.size
    xs = np.sort(x)
    w = np.concatenate(([0.0], np.unique(xs), [1.0]))
    below = np.searchsorted(xs, w, side="left") / n  # fraction of points < w
    upto = np.searchsorted(xs, w, side="right") / n  # fraction of points <= w
    if boundary_inside:
        below_open, upto_open = upto, below
    else:
        below_open, upto_open = below, upto
    if star:
        return float(max(np.max(upto - w), np.max(w - below_open)))
    # closed [w_i, w_j], i <= j: (upto_j - w_j) - (below_i - w_i)
    lo_closed = np.minimum.accumulate(below - w)
    pos = np.max(upto - w - lo_closed)
    # open (w_i, w_j), i < j: (w_j - below_j) - (w_i - upto_i)
    lo_open = np.minimum.accumulate(w - upto_open)
    neg = np.max(w[1:] - below_open[1:] - lo_open[:-1])
    return float(max(pos, neg, 0.0))


def _axis_candidates(x: np.ndarray, star: bool):
    vals = np.unique(x)
    his = np.concatenate((vals, [1.0]))
    if star:
        lo = np.zeros(his.size)
        hi = his
    else:
        los = np.concatenate(([0.0], vals))
        lo_idx, hi_idx = np.meshgrid(np.arange(los.size), np.arange(his.size), indexing="ij")
        keep = los[lo_idx] <= his[hi_idx]
        lo, hi = los[lo_idx[keep]], his[hi_idx[keep]]
    return lo, hi


def exact_work(points: PointSet, star: bool) -> int:
    if points.s == 1:
        return points.n
    total = 2
    for j in range(points.s):
        k = np.unique(points.points[:, j]).size
        total *= (k + 1) if star else (k + 1) * (k + 2) // 2
    return total * points.n


def _masks(x: np.ndarray, lo: np.ndarray, hi: np.ndarray, star: bool, closed: bool) -> np.ndarray:
    if closed:
        return (x[None, :] >= lo[:, None]) & (x[None, :] <= hi[:, None])
    if star:
        return x[None, :] < hi[:, None]
    return (x[None, :] > lo[:, None]) & (x[None, :] < hi[:, None])


def _side_extremum(masks: list[np.ndarray], lengths: list[np.ndarray], n: int, sign: float) -> float:
    """max over candidate boxes of sign * (count/N - vol)."""
    best = -math.inf
    first, second = masks[0].astype(np.float64), masks[1].astype(np.float64)
    for rest in product(*[range(m.shape[0]) for m in masks[2:]]):
        weight = np.ones(n)
        vol_rest = 1.0
        for j, c in enumerate(rest, start=2):
            weight = weight * masks[j][c]
            vol_rest *= lengths[j][c]
        second_w = second * weight[None, :]
        for start in range(0, first.shape[0], ROW_BLOCK):
            block = first[start : start + ROW_BLOCK]
            counts = block @ second_w.T
            vol = np.outer(lengths[0][start : start + ROW_BLOCK], lengths[1]) * vol_rest
            best = max(best, float(np.max(sign * (counts / n - vol))))
    return best


def _exact(points: PointSet, star: bool, boundary_inside: bool) -> float:
    x = points.points
    if points.s == 1:
        return _exact_1d(x[:, 0], star, boundary_inside)
    closed_masks, open_masks, lengths = [], [], []
    for j in range(points.s):
        lo, hi = _axis_candidates(x[:, j], star)
        closed_masks.append(_masks(x[:, j], lo, hi, star, closed=True))
        open_masks.append(_masks(x[:, j], lo, hi, star, closed=boundary_inside))
        lengths.append(hi - lo)
    pos = _side_extremum(closed_masks, lengths, points.n, 1.0)
    neg = _side_extremum(open_masks, lengths, points.n, -1.0)
    return max(pos, neg, 0.0)


# -- grid --------------------------------------------------------------------


def grid_work(s: int, grid: int, star: bool) -> int:
    if star:
        return (grid + 1) ** s
    return (grid * (grid + 1) // 2) ** (s - 1) * (grid + 1)


def _prefix_histogram(points: PointSet, grid: int) -> np.ndarray:
    cells = np.minimum(np.floor(points.points * grid).astype(np.int64), grid - 1)
    hist = np.zeros((grid,) * points.s, dtype=np.int64)
    np.add.at(hist, tuple(cells.T), 1)
    prefix = np.zeros((grid + 1,) * points.s, dtype=np.int64)
    inner = hist
    for axis in range(points.s):
        inner = np.cumsum(inner, axis=axis)
    prefix[(slice(1, None),) * points.s] = inner
    return prefix


def _last_axis_best(f: np.ndarray) -> float:
    """max over k1 < k2 of |f[..., k2] - f[..., k1]| along the last axis."""
    run_min = np.minimum.accumulate(f, axis=-1)
    run_max = np.maximum.accumulate(f, axis=-1)
    return float(max(np.max(f[..., 1:] - run_min[..., :-1]), np.max(run_max[..., :-1] - f[..., 1:])))


def _grid(points: PointSet, grid: int, star: bool) -> float:
    n, s = points.n, points.s
    prefix = _prefix_histogram(points, grid) / n
    ticks = np.arange(grid + 1) / grid
    if star:
        vol = np.ones((grid + 1,) * s)
        for axis in range(s):
            shape = [1] * s
            shape[axis] = grid + 1
            vol = vol * ticks.reshape(shape)
        return float(np.max(np.abs(prefix - vol)))
    if s == 1:
        return _last_axis_best(prefix - ticks)
    best = 0.0
    # intervals on the axes before the last two are enumerated; axis s-2 is batched
    for outer in product(*[[(a, b) for a in range(grid) for b in range(a + 1, grid + 1)]] * (s - 2)):
        slab = prefix
        width = 1.0
        for a, b in outer:
            slab = slab[b] - slab[a]
            width *= (b - a) / grid
        for a in range(grid):
            rows = slab[a + 1 :] - slab[a]  # (G - a, G + 1): intervals [a, b) on axis s-2
            w = width * (np.arange(a + 1, grid + 1) - a) / grid
            best = max(best, _last_axis_best(rows - w[:, None] * ticks[None, :]))
    return best


# -- public ------------------------------------------------------------------


def _discrepancy(points: PointSet, star: bool, method: str, grid: int, boundary_inside: bool,
                 budget: int | None) -> DiscrepancyReport:
    kind = "star" if star else "extreme"
    limit = config.budget("discrepancy", budget)
    convention = "boundary-inside" if boundary_inside else "half-open"
    if method not in ("auto", "exact", "grid"):
        raise SpexError(f"unknown method {method!r}")
    work = exact_work(points, star)
    if method == "exact" or (method == "auto" and work <= limit):
        if work > limit:
            raise BudgetExceeded(f"exact {kind} discrepancy", work, limit)
        value = _exact(points, star, boundary_inside)
        return DiscrepancyReport(kind, value, value, "exact-critical", convention, points.n, points.s, work,
                                 points.provenance)
    if boundary_inside:
        raise SpexError("the boundary-inside convention is only defined for the exact method")
    if grid < 1:
        raise SpexError("grid resolution must be >= 1")
    work = grid_work(points.s, grid, star)
    if work > limit:
        raise BudgetExceeded(f"grid {kind} discrepancy", work, limit)
    lower = _grid(points, grid, star)
    slack = (1 if star else 2) * points.s / grid
    return DiscrepancyReport(kind, lower, min(1.0, lower + slack), f"grid-{grid}", convention, points.n,
                             points.s, work, points.provenance)


def extreme_discrepancy(points: PointSet, method: str = "auto", grid: int = DEFAULT_GRID,
                        boundary_inside: bool = False, budget: int | None = None) -> DiscrepancyReport:
    return _discrepancy(points, False, method, grid, boundary_inside, budget)


def star_discrepancy(points: PointSet, method: str = "auto", grid: int = DEFAULT_GRID,
                     boundary_inside: bool = False, budget: int | None = None) -> DiscrepancyReport:
    return _discrepancy(points, True, method, grid, boundary_inside, budget)


def box_deviation(points: PointSet, lo: Sequence[float], hi: Sequence[float]) -> float:
    """|#(points in prod [lo_j, hi_j)) / N - vol| for one half-open box."""
    lo, hi = np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64)
    if lo.shape != (points.s,) or hi.shape != (points.s,):
        raise SpexError(f"box corners must have {points.s} coordinates")
    if np.any(lo > hi) or np.any(lo < 0) or np.any(hi > 1):
        raise SpexError("need 0 <= lo <= hi <= 1 on every axis")
    inside = np.all((points.points >= lo) & (points.points < hi), axis=1)
    return abs(inside.sum() / points.n - float(np.prod(hi - lo)))


def koksma_szusz_rhs(points: PointSet, A: int, budget: int | None = None) -> float:
    """1/A + (1/N) sum_{0 < |a|_inf <= A} |sum_n e(<a, x_n>)| / prod_j (|a_j| + 1), constant taken as 1."""
    if A < 1:
        raise SpexError("A must be >= 1")
    freqs = (2 * A + 1) ** points.s
    limit = config.budget("koksma_szusz", budget)
    if freqs > limit:
        raise BudgetExceeded("Koksma-Szusz frequency box", freqs, limit)
    a = np.arange(-A, A + 1)
    weights = 1.0 / (np.abs(a) + 1.0)
    # phases[j][a, n] = e(a x_{n,j}) with the product reduced mod 1 first
    phases = [np.exp(2j * np.pi * np.mod(np.outer(a, points.points[:, j]), 1.0)) for j in range(points.s)]
    total = 0.0
    if points.s == 1:
        sums = np.abs(phases[0].sum(axis=1)) * weights
        sums[A] = 0.0
        total = float(sums.sum())
    else:
        for rest in product(range(2 * A + 1), repeat=points.s - 2):
            factor = np.ones(points.n, dtype=np.complex128)
            w_rest = 1.0
            for j, c in enumerate(rest, start=2):
                factor = factor * phases[j][c]
                w_rest *= weights[c]
            sums = np.abs(phases[0] @ (phases[1] * factor[None, :]).T)
            sums *= np.outer(weights, weights) * w_rest
            if all(c == A for c in rest):
                sums[A, A] = 0.0
            total += float(sums.sum())
    return 1.0 / A + total / points.n


class ShapeBound(NamedTuple):
    value: float  # N^(-1/2) p^(1/2 - rho_2s / 2)
    rho: str
    threshold: float  # p^(1 - rho_2s)
    nontrivial: bool
    note: str = SHAPE


def powgen_discrepancy_bound(p: int, n_points: int, s: int) -> ShapeBound:
    """Shape of the power-generator discrepancy bound, without constants or p^o(1)."""
    if n_points < 1 or s < 1:
        raise SpexError("need N >= 1 and s >= 1")
    r = rho(2 * s)
    value = math.exp(-0.5 * math.log(n_points) + (0.5 - 0.5 * float(r)) * math.log(p))
    threshold = math.exp((1 - float(r)) * math.log(p))
    return ShapeBound(value, str(r), threshold, n_points >= threshold)


@dataclass(frozen=True)
class ShapeComparison:
    p: int
    e: int
    theta: int
    s: int
    N: int
    tau: int
    discrepancy: DiscrepancyReport
    bound: ShapeBound
    ratio: float = field(default=math.nan)

    def to_json(self) -> dict:
        return {"p": self.p, "e": self.e, "theta": self.theta, "s": self.s, "N": self.N, "tau": self.tau,
                "discrepancy": self.discrepancy.to_json(), "bound_shape": self.bound.value,
                "rho_2s": self.bound.rho, "nontrivial_threshold": self.bound.threshold,
                "nontrivial": self.bound.nontrivial, "ratio": self.ratio, "note": self.bound.note}


def compare_with_bound(g: GeneratorSpec, s: int = 1, n_points: int | None = None, method: str = "auto",
                       grid: int = DEFAULT_GRID, budget: int | None = None) -> ShapeComparison:
    """Measured extreme discrepancy of a power-generator point set next to the bound shape (N = tau by default)."""
    n_points = g.tau if n_points is None else n_points
    report = extreme_discrepancy(build_points_powgen(g, s, n_points), method, grid, budget=budget)
    bound = powgen_discrepancy_bound(g.p, n_points, s)
    return ShapeComparison(g.p, g.e, g.theta, s, n_points, g.tau, report, bound, report.value / bound.value)
