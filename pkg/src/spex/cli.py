"""Command line interface: ``spex <subcommand> ...``.

Exit codes: 0 success, 1 domain error, 2 budget refusal or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import __version__
from .arith import is_prime, primes_up_to
from .bounds import bound_table, kappa, parse_epsilon
from .counting import CSV_HEADER, verify_moments
from .discrepancy import (DEFAULT_GRID, PointSet, build_points_powgen,
                          compare_with_bound, extreme_discrepancy, koksma_szusz_rhs, star_discrepancy)
from .errors import BudgetExceeded, SpexError
from .expsum import bound_menu, classify_primes, expsum_report, sum_units, sum_via_crt
from .poly import check_kappa_conditions, check_rho_conditions, make_poly, parse_poly, reduce_exponents_prime
from .powgen import iterate, make_generator, make_multivariate, nth_term, orbit_cycle, verify_order_lemmas
from .rng import SplitMix64


def _dump(doc, out=None) -> None:
    out = out or sys.stdout
    out.write(json.dumps(doc, indent=2, allow_nan=False) + "\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise SpexError(f"expected comma-separated integers, got {text!r}") from None


# -- scan --------------------------------------------------------------------


@dataclass
class ScanConfig:
    primes: list[int]
    r: int = 2
    policy: str = "random"  # "random" | "coprime"
    trials: int = 1
    seed: int = 0
    output: str | None = None
    fmt: str = "json"
    epsilon: Fraction = field(default_factory=lambda: Fraction(3, 92))

    def __post_init__(self):
        if self.trials < 1:
            raise SpexError("trials must be >= 1")
        if self.r < 1:
            raise SpexError("r must be >= 1")
        if self.policy not in ("random", "coprime"):
            raise SpexError(f"unknown exponent policy {self.policy!r}")
        if self.fmt not in ("json", "csv"):
            raise SpexError(f"unknown format {self.fmt!r}")
        for p in self.primes:
            if not is_prime(p):
                raise SpexError(f"{p} is not prime")
            if p - 2 < self.r:
                raise SpexError(f"p = {p} leaves fewer than r = {self.r} exponents in [1, p-2]")


def _sample_exponents(rng: SplitMix64, p: int, r: int, policy: str) -> list[int]:
    pool = range(1, p - 1)
    if policy == "coprime":
        pool = [e for e in pool if math.gcd(e, p - 1) == 1]
        if len(pool) < r:
            raise SpexError(f"p = {p} has fewer than {r} exponents coprime to p - 1")
    pool = list(pool)
    chosen = []
    for _ in range(r):  # partial Fisher-Yates
        i = len(chosen) + rng.randbelow(len(pool) - len(chosen))
        pool[len(chosen)], pool[i] = pool[i], pool[len(chosen)]
        chosen.append(pool[len(chosen)])
    return sorted(chosen)


SCAN_COLUMNS = ["p", "poly", "abs_sum", "weil_units", "weil_units_ok", "kappa_conditions",
                "rho_conditions", "ratio"]


def run_scan(cfg: ScanConfig, budget: int | None = None, workers: int | None = None) -> dict:
    """One row per sampled polynomial; rows depend only on (cfg, seed)."""
    root = SplitMix64(cfg.seed)
    rows = []
    k = kappa(cfg.r, cfg.epsilon)
    for p in cfg.primes:
        rng = root.split(p)
        for _ in range(cfg.trials):
            exps = _sample_exponents(rng, p, cfg.r, cfg.policy)
            coeffs = [rng.randint(1, p - 1) for _ in exps]
            f = make_poly(p, zip(coeffs, exps))
            value = abs(sum_units(f, budget=budget, workers=workers))
            menu = {b.name: b for b in bound_menu(f, cfg.epsilon)}
            bound_values = {name: b.value for name, b in menu.items() if b.applicable}
            weil = menu["weil_units"].value
            rows.append({
                "p": p,
                "poly": f.to_json(),
                "abs_sum": value,
                "bounds": bound_values,
                "weil_units": weil,
                "weil_units_ok": value <= weil + 1e-9 * p,
                "kappa_conditions": check_kappa_conditions(reduce_exponents_prime(f), p, cfg.epsilon).passed,
                "rho_conditions": check_rho_conditions(reduce_exponents_prime(f), p).passed,
                "ratio": value / p ** float(1 - k),
            })
    return {"config": {"primes": cfg.primes, "r": cfg.r, "policy": cfg.policy, "trials": cfg.trials,
                       "seed": cfg.seed, "epsilon": str(cfg.epsilon)},
            "rows": rows}


def scan_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")  # RFC 4180
    writer.writerow(SCAN_COLUMNS)
    for row in report["rows"]:
        poly = " + ".join(f"{a}*x^{e}" for a, e in row["poly"]["terms"])
        writer.writerow([row["p"], poly, repr(row["abs_sum"]), repr(row["weil_units"]), row["weil_units_ok"],
                         row["kappa_conditions"], row["rho_conditions"], repr(row["ratio"])])
    return buf.getvalue()


# -- verify ------------------------------------------------------------------


def run_verify(tier: str, workers: int | None = None, seed: int = 0) -> list[dict]:
    """Exhaustive small-size checks of identities and theorem-backed inequalities."""
    full = tier == "full"
    results = []

    def record(name, passed, detail, started):
        results.append({"check": name, "passed": bool(passed), "detail": detail,
                        "seconds": round(time.perf_counter() - started, 3)})

    t0 = time.perf_counter()
    q_max = 2000 if full else 200
    lemmas = verify_order_lemmas(q_max, seed=seed)
    record("order_lemmas", lemmas.passed, f"q <= {q_max}, {len(lemmas.counterexamples)} counterexamples", t0)

    t0 = time.perf_counter()
    bad = 0
    primes = primes_up_to(10**4 if full else 500)
    rng = SplitMix64(seed).split(1)
    for p in primes:
        a = rng.randint(1, p - 1)
        if abs(sum_units(make_poly(p, [(a, 1)]), workers=workers) + 1) >= 1e-9:
            bad += 1
    record("linear_character_sums", bad == 0, f"{len(primes)} primes, {bad} failures", t0)

    t0 = time.perf_counter()
    bad = 0
    cases = 0
    for p in (5, 7, 11, 13) if full else (5, 7):
        for exps in ([1], [2], [3], [1, 2], [1, 3], [2, 3]):
            for t in (1, 2):
                cases += 1
                if not verify_moments([1] * len(exps), exps, t, p).identities_hold:
                    bad += 1
    record("moment_identities", bad == 0, f"{cases} cases, {bad} failures", t0)

    t0 = time.perf_counter()
    bad = 0
    rng = SplitMix64(seed).split(2)
    moduli = [15, 21, 35, 77, 105, 143, 1001] + ([9991, 30030, 65535] if full else [])
    for q in moduli:
        f = make_poly(q, [(rng.randint(1, q - 1), rng.randint(1, 50)) for _ in range(2)] + [(1, 1)])
        if abs(sum_units(f, workers=workers) - sum_via_crt(f, workers=workers)) > 1e-6 * q:
            bad += 1
    record("crt_product", bad == 0, f"{len(moduli)} moduli, {bad} failures", t0)

    t0 = time.perf_counter()
    report = run_scan(ScanConfig(primes_up_to(499 if full else 100)[2:], r=2, trials=2, seed=seed),
                      workers=workers)
    bad = sum(not row["weil_units_ok"] for row in report["rows"])
    record("weil_units", bad == 0, f"{len(report['rows'])} polynomials, {bad} violations", t0)
    return results


# -- subcommands -------------------------------------------------------------


def cmd_expsum(args) -> int:
    f = parse_poly(args.poly, args.q)
    report = expsum_report(f, via_crt=args.via_crt, bounds=args.bounds, eps=parse_epsilon(args.epsilon),
                           budget=args.budget, workers=args.threads)
    doc = report.to_json()
    if args.classify:
        doc["classification"] = classify_primes(f).to_json()
    _dump(doc)
    return 0


def cmd_bounds(args) -> int:
    _dump(bound_table(args.epsilon, args.r_max, derived=args.derived).to_json())
    return 0


def cmd_moments(args) -> int:
    exps = _int_list(args.exponents)
    coeffs = _int_list(args.coeffs) if args.coeffs else [1] * len(exps)
    reports = [verify_moments(coeffs, exps, t, p, args.budget)
               for p in _int_list(args.p) for t in _int_list(args.t)]
    if args.format == "json":
        _dump({"rows": [{"p": m.p, "r": len(m.exps), "t": m.t, "exponents": list(m.exps), "I": m.I_rt,
                         "sumJ": m.sum_J, "sumJsq": m.sum_J_sq, "orth": m.orthogonality_value,
                         "identities_hold": m.identities_hold} for m in reports]})
    else:
        writer = csv.writer(sys.stdout, lineterminator="\r\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(m.csv_row() for m in reports)
    return 0


def cmd_powgen(args) -> int:
    if args.multivariate:
        try:
            with open(args.multivariate) as fh:
                desc = json.load(fh)
        except OSError as exc:
            raise SpexError(f"{args.multivariate}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise SpexError(f"{args.multivariate}: invalid JSON ({exc})") from None
        system = make_multivariate(desc["kind"], int(desc["p"]), desc["params"],
                                   assume_zero_free=bool(desc.get("assume_zero_free", False)))
        u0 = desc["u0"]
        n = args.n if args.n is not None else 10
        orbit = iterate(system, u0, n)
        pre, period = orbit_cycle(system, u0)
        if args.format == "lines":
            for u in orbit:
                print(" ".join(map(str, u)))
            return 0
        _dump({"kind": system.kind, "p": system.p, "m": system.m, "u0": list(map(int, u0)),
               "orbit": [list(u) for u in orbit], "preperiod": pre, "period": period})
        return 0
    if args.p is None or args.e is None or args.theta is None:
        raise SpexError("powgen needs --p, --e and --theta (or --multivariate)")
    g = make_generator(args.p, args.e, args.theta)
    if args.range:
        lo, _, hi = args.range.partition(":")
        try:
            indices = range(int(lo), int(hi))
        except ValueError:
            raise SpexError(f"--range expects START:STOP, got {args.range!r}") from None
    else:
        n = args.n if args.n is not None else 10
        indices = range(n)
    terms = [nth_term(g, i) for i in indices]
    if args.format == "lines":
        for u in terms:
            print(u)
        return 0
    _dump({"p": g.p, "e": g.e, "theta": g.theta, "T": g.T, "preperiod": g.preperiod, "tau": g.tau,
           "start": indices.start, "terms": terms})
    return 0


def cmd_discrepancy(args) -> int:
    gen = None
    if args.points_file:
        points = PointSet.from_csv(args.points_file)
    elif args.powgen:
        vals = _int_list(args.powgen)
        if len(vals) != 5:
            raise SpexError("--powgen expects p,e,theta,s,N")
        p, e, theta, s, n = vals
        gen = make_generator(p, e, theta)
        points = build_points_powgen(gen, s, n)
    else:
        raise SpexError("give --points-file or --powgen")
    method = "exact" if args.exact else ("grid" if args.grid else "auto")
    grid = args.grid or DEFAULT_GRID
    func = star_discrepancy if args.star else extreme_discrepancy
    report = func(points, method, grid, args.boundary_inside, args.budget)
    doc = {"discrepancy": report.to_json()}
    if args.ks_rhs:
        doc["koksma_szusz_rhs"] = {"A": args.ks_rhs, "value": koksma_szusz_rhs(points, args.ks_rhs, args.budget),
                                   "label": "constant-free"}
    if gen is not None and args.shape:
        doc["bound_comparison"] = compare_with_bound(gen, points.s, points.n, method, grid, args.budget).to_json()
    _dump(doc)
    return 0


def cmd_scan(args) -> int:
    if args.primes is not None:
        primes = _int_list(args.primes)
    else:
        primes = [p for p in primes_up_to(args.p_max) if p >= args.p_min]
    cfg = ScanConfig(primes, args.r, args.policy, args.trials, args.seed, args.output, args.format,
                     parse_epsilon(args.epsilon))
    report = run_scan(cfg, args.budget, args.threads)
    text = scan_csv(report) if cfg.fmt == "csv" else json.dumps(report, indent=2, allow_nan=False) + "\n"
    if cfg.output:
        try:
            with open(cfg.output, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise SpexError(f"{cfg.output}: {exc}") from None
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    results = run_verify(args.tier, args.threads, args.seed)
    if args.json:
        _dump({"tier": args.tier, "results": results, "passed": all(r["passed"] for r in results)})
    else:
        for r in results:
            print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['check']:<24} {r['detail']}")
        print(f"{sum(r['passed'] for r in results)}/{len(results)} checks passed")
    return 0 if all(r["passed"] for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: SPEX_THREADS or all cores)")
    common.add_argument("--budget", type=int, default=None, help="work budget (default: SPEX_BUDGET or per-operation)")

    parser = argparse.ArgumentParser(prog="spex", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("expsum", parents=[common], help="evaluate S_q(f) and the bound menu")
    p.add_argument("--q", type=int, default=None, help="modulus (or give 'mod q' in --poly)")
    p.add_argument("--poly", required=True, help="e.g. '1*x^1+1*x^2' or a JSON object")
    p.add_argument("--via-crt", action="store_true", help="also evaluate the CRT product")
    p.add_argument("--bounds", action=argparse.BooleanOptionalAction, default=True,
                   help="evaluate the bound menu (default on)")
    p.add_argument("--json", action="store_true", help="accepted for symmetry; output is always JSON")
    p.add_argument("--classify", action="store_true", help="add the composite prime classification")
    p.add_argument("--epsilon", default="3/92")
    p.set_defaults(func=cmd_expsum)

    p = sub.add_parser("bounds", parents=[common], help="exact saving exponents")
    p.add_argument("--epsilon", default="3/92")
    p.add_argument("--r-max", type=int, default=8)
    p.add_argument("--derived", action="store_true", help="include rho_r and sigma_r")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("moments", parents=[common], help="solution counts and moment identities")
    p.add_argument("--p", required=True, help="prime or comma-separated primes")
    p.add_argument("--exponents", required=True, help="comma-separated e_1..e_r")
    p.add_argument("--coeffs", default=None)
    p.add_argument("--t", default="1,2", help="comma-separated t values")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("powgen", parents=[common], help="power generator sequences")
    p.add_argument("--p", type=int)
    p.add_argument("--e", type=int)
    p.add_argument("--theta", type=int)
    p.add_argument("--n", type=int, default=None, help="number of terms from index 0")
    p.add_argument("--range", default=None, help="START:STOP index window")
    p.add_argument("--multivariate", default=None, help="JSON system description")
    p.add_argument("--format", choices=("json", "lines"), default="json")
    p.set_defaults(func=cmd_powgen)

    p = sub.add_parser("discrepancy", parents=[common], help="discrepancy of a point set")
    p.add_argument("--points-file", default=None, help="CSV, one point per line")
    p.add_argument("--powgen", default=None, help="p,e,theta,s,N")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--grid", type=int, default=None, metavar="G")
    p.add_argument("--star", action="store_true", help="anchored boxes")
    p.add_argument("--boundary-inside", action="store_true",
                   help="count boundary points as inside (sensitivity check)")
    p.add_argument("--ks-rhs", type=int, default=None, metavar="A")
    p.add_argument("--shape", action="store_true", help="compare with the bound shape (--powgen only)")
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("scan", parents=[common], help="sampled sums against the bound menu")
    p.add_argument("--primes", default=None, help="comma-separated primes")
    p.add_argument("--p-min", type=int, default=5)
    p.add_argument("--p-max", type=int, default=100)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--policy", choices=("random", "coprime"), default="random")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", default="3/92")
    p.add_argument("--output", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", parents=[common], help="run the exhaustive check suites")
    p.add_argument("--tier", choices=("fast", "full"), default="fast")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"spex: {exc}", file=sys.stderr)
        return 2
    except SpexError as exc:
        print(f"spex: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
