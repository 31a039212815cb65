"""Command line: ``meanzero {bounds,extremal,verify,search,lemma}``.

Exit codes: 0 pass, 1 mathematical violation, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from .core import make_bounds
from .extremal import certify_equality, extremal, extremal_primitive
from .functionals import (
    corollary1_bound,
    corollary2_bound,
    kouba_bound,
    lemma1_monotonicity_check,
    perfetti_bound,
    proposition1_bound,
    theorem1_bound,
    thong_bound,
)
from .report import build_report, extremal_rows, parse_weight, write_extremal_csv
from .sampling import SCHEMES, SamplerConfig, campaign
from .search import search_max

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class ConfigError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _bounds_arg(args):
    try:
        return make_bounds(args.m, args.M)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_bounds(args) -> int:
    b = _bounds_arg(args)
    phi = parse_weight(args.phi)
    out = {
        "schema": 1,
        "bounds": b.as_dict(),
        "weight": phi.spec(),
        "theorem1_bound": theorem1_bound(b, phi),
        "corollary1_bound": corollary1_bound(b, phi.param) if phi.kind == "power" else None,
        "corollary2_bound": corollary2_bound(b),
        "proposition1_bound": proposition1_bound(b),
        "perfetti_bound": perfetti_bound(b),
        "thong_bound": thong_bound(b),
        "kouba_bound": kouba_bound(b),
    }
    if args.json:
        _emit(out)
        return EXIT_OK
    print(f"m = {b.m!r}, M = {b.M!r}")
    print(f"peak height h* = -mM/(M-m) = {b.peak!r}")
    print(f"crossovers c0 = {b.c0!r}, c1 = {b.c1!r}")
    print(f"theorem1_bound K({phi.spec()}, h*) = {out['theorem1_bound']!r}")
    if out["corollary1_bound"] is not None:
        p = phi.param
        print(f"corollary1_bound ||J||_{p:g} <= {out['corollary1_bound']!r} "
              f"(coefficient {out['corollary1_bound'] / b.peak!r})")
    print(f"corollary2_bound exp(int log|J|) <= {out['corollary2_bound']!r}")
    print(f"proposition1_bound ||J||_inf <= {out['proposition1_bound']!r}")
    print(f"perfetti_bound int J^2 <= {out['perfetti_bound']!r}")
    print(f"thong_bound (h*/2) = {out['thong_bound']!r}")
    print(f"kouba_bound (h*/sqrt 3) = {out['kouba_bound']!r}")
    return EXIT_OK


def cmd_extremal(args) -> int:
    b = _bounds_arg(args)
    if args.grid < 1:
        raise ConfigError("--grid must be at least 1")
    rows = extremal_rows(extremal(b, args.which), extremal_primitive(b, args.which), args.grid)
    if args.out is None:
        sys.stdout.write("x,f,J\n")
        for row in rows:
            sys.stdout.write(",".join(repr(v) for v in row) + "\n")
        return EXIT_OK
    try:
        write_extremal_csv(args.out, rows)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_verify(args) -> int:
    b = _bounds_arg(args)
    weights = [parse_weight(s) for s in (args.phi or ["pow:2"])]
    cfg = SamplerConfig(cells=args.cells, seed=args.seed, scheme=args.scheme)
    t0 = time.perf_counter()
    rep = campaign(b, weights, args.samples, cfg)
    t1 = time.perf_counter()
    certs = [certify_equality(b, phi) for phi in weights]
    t2 = time.perf_counter()
    timing = {"campaign_s": t1 - t0, "certificate_s": t2 - t1} if args.timing else None
    report = build_report(b, weights, rep, certs, timing)
    text = report.to_json()
    if args.report is None:
        sys.stdout.write(text)
    else:
        try:
            with open(args.report, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.report}: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_search(args) -> int:
    b = _bounds_arg(args)
    phi = parse_weight(args.phi)
    strategy = {"vertex": "vertex_enum", "local": "local_search"}[args.strategy]
    res = search_max(b, phi, args.cells, strategy, restarts=args.restarts, seed=args.seed)
    _emit(res.as_dict())
    return EXIT_OK if res.sound else EXIT_VIOLATION


def cmd_lemma(args) -> int:
    phi = parse_weight(args.phi)
    T = args.T if args.T is not None else (phi.T if math.isfinite(phi.T) else 1.0)
    rep = lemma1_monotonicity_check(phi, T, args.grid)
    out = {
        "weight": phi.spec(),
        "T": rep.T,
        "grid": rep.grid,
        "violations": rep.violations,
        "max_violation": rep.max_violation,
        "plateau": rep.plateau,
        "constant": rep.constant,
        "note": rep.note,
        "pass": rep.passed,
    }
    if args.json:
        _emit(out)
    else:
        print(f"K({phi.spec()}, t) on {rep.grid} points of (0, {rep.T!r}]: "
              f"{rep.violations} violations, max decrease {rep.max_violation!r} ({rep.note})")
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="meanzero", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def box(p):
        p.add_argument("--m", type=float, default=-1.0, help="lower bound (negative)")
        p.add_argument("--M", type=float, default=1.0, help="upper bound (positive)")

    p = sub.add_parser("bounds", help="print every sharp and comparison bound")
    box(p)
    p.add_argument("--phi", default="pow:1", help="pow:<p> | log:<eps> | table:<path>")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("extremal", help="dump an extremizer and its primitive as CSV")
    box(p)
    p.add_argument("--which", choices=["f0", "f1"], default="f0")
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_extremal)

    p = sub.add_parser("verify", help="random campaign plus equality certificate")
    box(p)
    p.add_argument("--phi", action="append", help="weight spec; repeat for several (default pow:2)")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--cells", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", choices=SCHEMES, default="uniform_project")
    p.add_argument("--report", default=None, help="JSON path (stdout if omitted)")
    p.add_argument("--timing", action="store_true", help="record wall times (breaks byte-stability)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="maximize the LHS over the n-cell polytope")
    box(p)
    p.add_argument("--phi", default="pow:2")
    p.add_argument("--cells", type=int, default=12)
    p.add_argument("--strategy", choices=["vertex", "local"], default="vertex")
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("lemma", help="check that t -> K(phi, t) is nondecreasing")
    p.add_argument("--phi", default="pow:2")
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_lemma)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
