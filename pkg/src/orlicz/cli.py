"""``orlicz`` command line: compute conjugates, resolve multiplier spaces,
check factorization, and run the verification suites.

Exit codes: 0 success (a negative verdict is still a success), 2 input
error, 3 tolerance failure in ``verify``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import presets, verify
from .conjugation import ominus, ominus_b, ominus_truncated
from .extended import fmt
from .factorization import STABILITY_RTOL, Mode, equivalence_check, factorization_check, mode_for
from .funcdsl import DSLError, format_expr, parse, read_fixture
from .measure import Kind, load_table, luxemburg_norm, modular
from .multipliers import resolve, triviality_check
from .young import GridSpec

EXIT_OK, EXIT_INPUT, EXIT_TOLERANCE = 0, 2, 3


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _space(text: str) -> tuple[Kind, int]:
    kind, _, count = text.partition(":")
    try:
        k = Kind(kind)
        n = int(count) if count else 64
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected finite:N or infinite:N, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("cell count must be positive")
    return k, n


def _functions(args, need_phi2=False):
    phi_txt, phi1_txt = args.phi, args.phi1
    if getattr(args, "preset", None):
        try:
            p = presets.get(args.preset)
        except KeyError as exc:
            raise InputError(str(exc.args[0])) from None
        phi_txt = phi_txt or p.phi
        phi1_txt = phi1_txt or p.phi1
    if not phi_txt or not phi1_txt:
        raise InputError("both --phi and --phi1 are required (or --preset)")
    phi = _parse(phi_txt, "--phi")
    phi1 = _parse(phi1_txt, "--phi1")
    phi2 = _parse(args.phi2, "--phi2") if getattr(args, "phi2", None) else None
    return phi, phi1, phi2


def _parse(text, flag):
    """Parse an expression, or ``@path`` for the first entry of a fixture file."""
    if text.startswith("@"):
        funcs = _fixture(text[1:], flag)
        if not funcs:
            raise InputError(f"{flag}: fixture {text[1:]} has no expressions")
        return funcs[0]
    try:
        return parse(text)
    except DSLError as exc:
        raise InputError(f"{flag}: {exc}") from None


def _fixture(path, flag):
    try:
        return read_fixture(path)
    except OSError as exc:
        raise InputError(f"{flag}: {exc}") from None
    except DSLError as exc:
        raise InputError(f"{flag}: {exc}") from None


def _grid(args) -> GridSpec:
    try:
        return GridSpec(args.umin, args.umax, args.n)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _num(x):
    """JSON-safe float: infinities become the string ``"inf"``."""
    if isinstance(x, (float, np.floating)):
        return fmt(float(x))
    return x


def _emit(out, rows, columns, fmt_name, document=None):
    if fmt_name == "json":
        json.dump(document, out, indent=2, sort_keys=False)
        out.write("\n")
        return
    if fmt_name == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])
        return
    cells = [[_cell(v) for v in r] for r in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    out.write("  ".join(c.rjust(w) for c, w in zip(columns, widths)) + "\n")
    for r in cells:
        out.write("  ".join(v.rjust(w) for v, w in zip(r, widths)) + "\n")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _kv(out, pairs, fmt_name, document):
    if fmt_name == "json":
        _emit(out, None, None, "json", document)
        return
    _emit(out, [(k, v) for k, v in pairs], ["field", "value"], fmt_name)


# ---------------------------------------------------------------------------
# subcommands


def cmd_ominus(args, out) -> int:
    phi, phi1, _ = _functions(args)
    grid = _grid(args)
    try:
        res = ominus(phi, phi1, grid) if args.trunc is None else ominus_truncated(phi, phi1, args.trunc, grid)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    rows = [(float(u), float(v), float(s)) for (u, s), v in zip(res.argmax_profile, res.values)]
    doc = {
        "phi": format_expr(phi),
        "phi1": format_expr(phi1),
        "truncation": _num(float(res.truncation)),
        "domain_convention": res.domain_convention.value,
        "fallback": bool(res.fallback),
        "rows": [{"u": _num(u), "value": _num(v), "argmax": _num(s)} for u, v, s in rows],
    }
    _emit(out, rows, ["u", "value", "argmax"], args.format, doc)
    return EXIT_OK


def cmd_resolve(args, out) -> int:
    phi, phi1, _ = _functions(args)
    ms = resolve(phi1, phi, _grid(args))
    slope = ms.growth_exponent()
    doc = {
        "phi": format_expr(phi),
        "phi1": format_expr(phi1),
        "classification": ms.classification.value,
        "triviality": triviality_check(phi, phi1).value,
        "summary": ms.describe(),
        "embed_const": _num(ms.embed_const),
        "reverse_const": None if ms.reverse_const is None else _num(float(ms.reverse_const)),
        "b_generator": _num(float(ominus_b(phi, phi1))),
        "growth_exponent": None if slope is None else _num(slope),
    }
    pairs = [(k, "none" if v is None else v) for k, v in doc.items()]
    _kv(out, pairs, args.format, doc)
    return EXIT_OK


def cmd_factorize(args, out) -> int:
    phi, phi1, phi2 = _functions(args)
    kind, _ = args.space
    mode = Mode(args.mode) if args.mode else mode_for(kind)
    rtol = args.tol if args.tol is not None else STABILITY_RTOL
    u_range = (args.range_lo, args.range_hi)
    try:
        if phi2 is not None:
            rep = equivalence_check(phi, phi1, phi2, mode, u_range, args.points, rtol)
        else:
            rep = factorization_check(phi, phi1, kind, _grid(args), u_range, args.points, mode, rtol)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    doc = {
        "phi": format_expr(phi),
        "phi1": format_expr(phi1),
        "phi2": format_expr(phi2) if phi2 is not None else "ominus",
        "measure": kind.value,
        "mode": rep.mode.value,
        "verdict": bool(rep.verdict),
        "c": _num(rep.c),
        "C": _num(rep.C),
        "spread": _num(rep.spread),
        "u0": _num(rep.u0),
        "diagnostic": rep.diagnostic,
        "excluded": [_num(float(u)) for u in rep.excluded],
        "trace": [{"u": _num(float(u)), "ratio": _num(float(r))} for u, r in rep.ratio_trace],
    }
    if args.format == "csv":
        _emit(out, [tuple(r) for r in rep.ratio_trace], ["u", "ratio"], "csv")
        return EXIT_OK
    if args.format == "json":
        _emit(out, None, None, "json", doc)
        return EXIT_OK
    keys = ["phi", "phi1", "phi2", "measure", "mode", "verdict", "c", "C", "spread", "u0", "diagnostic"]
    _kv(out, [(k, doc[k]) for k in keys], "table", doc)
    return EXIT_OK


def cmd_norm(args, out) -> int:
    phi = _parse(args.phi, "--phi")
    try:
        sp, x = load_table(Path(args.table).read_text(), args.space[0])
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from None
    doc = {"phi": format_expr(phi), "norm": _num(luxemburg_norm(phi, x, sp)), "modular": _num(modular(phi, x, sp))}
    _kv(out, list(doc.items()), args.format, doc)
    return EXIT_OK


def cmd_format(args, out) -> int:
    if args.expr.startswith("@"):
        for phi in _fixture(args.expr[1:], "expr"):
            out.write(format_expr(phi) + "\n")
        return EXIT_OK
    out.write(format_expr(_parse(args.expr, "expr")) + "\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    names = list(verify.SUITES) if not args.suite or "all" in args.suite else args.suite
    unknown = [n for n in names + ([args.inject_fault] if args.inject_fault else []) if n not in verify.SUITES]
    if unknown:
        raise InputError(f"unknown suite {unknown[0]!r}; known: {', '.join(verify.SUITES)}")
    results = verify.run(names, seed=args.seed, trials=args.trials, fault=args.inject_fault)
    passed = all(r.passed for r in results)
    doc = {
        "seed": args.seed,
        "passed": passed,
        "suites": [
            {"name": r.name, "passed": r.passed, "checks": r.checks, "violations": r.violations, "detail": r.detail}
            for r in results
        ],
    }
    if args.format == "json":
        _emit(out, None, None, "json", doc)
    elif args.format == "csv":
        _emit(out, [(r.name, r.passed, r.checks, r.violations, r.detail) for r in results],
              ["suite", "passed", "checks", "violations", "detail"], "csv")
    else:
        for r in results:
            out.write(r.line() + "\n")
        failing = [r.name for r in results if not r.passed]
        out.write("all suites passed\n" if passed else f"failing: {', '.join(failing)}\n")
    return EXIT_OK if passed else EXIT_TOLERANCE


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orlicz", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, functions=True, grid=True):
        if functions:
            p.add_argument("--phi", help="target function phi (function language, or @fixture-file)")
            p.add_argument("--phi1", help="source function phi1")
            p.add_argument("--preset", help=f"named pair: {', '.join(presets.PRESETS)}")
        if grid:
            p.add_argument("--umin", type=float, default=1e-6)
            p.add_argument("--umax", type=float, default=1e6)
            p.add_argument("--n", type=int, default=4097, help="grid points (plus u = 0)")
        p.add_argument("--format", choices=["table", "csv", "json"], default="table")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--space", type=_space, default=(Kind.FINITE, 64), help="finite:N or infinite:N")

    p = sub.add_parser("ominus", help="tabulate phi (-) phi1 with its argmax")
    common(p)
    p.add_argument("--trunc", type=float, default=None, help="truncation level a (sup over 0 <= s <= a)")
    p.set_defaults(func=cmd_ominus)

    p = sub.add_parser("resolve", help="classify M(L^phi1, L^phi)")
    common(p)
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("factorize", help="check phi1^-1 phi2^-1 ~ phi^-1")
    common(p)
    p.add_argument("--phi2", help="use this phi2 instead of phi (-) phi1")
    p.add_argument("--mode", choices=["all", "large"], default=None, help="default follows --space")
    p.add_argument("--range-lo", type=float, default=1e-3)
    p.add_argument("--range-hi", type=float, default=1e3)
    p.add_argument("--points", type=int, default=241)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("norm", help="Luxemburg norm and modular of a tabulated simple function")
    common(p, functions=False, grid=False)
    p.add_argument("--phi", required=True)
    p.add_argument("--table", required=True, help="file with cell_id,measure,value rows")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("format", help="print the canonical form of an expression")
    p.add_argument("expr", help="expression, or @file to format every line of a fixture")
    p.set_defaults(func=cmd_format)

    p = sub.add_parser("verify", help="run the property suites")
    common(p, functions=False, grid=False)
    p.add_argument("--suite", action="append", help=f"one of: all, {', '.join(verify.SUITES)} (repeatable)")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--inject-fault", default=None, metavar="SUITE",
                   help="test hook: make SUITE check a deliberately wrong bound")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except InputError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT


def run(argv) -> tuple[int, str, str]:
    """Run in-process and capture output (used by tests)."""
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":
    sys.exit(main())
