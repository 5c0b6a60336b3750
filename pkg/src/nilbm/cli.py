"""Command-line front end.

Exit codes: 0 success, 1 verdict differs from ``--expect``, 2 invalid algebra
or failed structural check, 3 unreadable or malformed input, 4 Inconclusive
under ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from fractions import Fraction

from . import __version__, lie_core
from .boxes import union_from_dict, union_to_dict
from .errors import AlgebraError, NilbmError, NotStratifiable, UnknownGroup
from .group_law import (DilationSpec, ProductLaw, carnot_law, custom_law, derive_bch, dump_law, law_digest,
                        law_from_dict, verify_associativity, verify_first_layer, verify_triangular)
from .inequalities import (INCONCLUSIVE, SHARPNESS_COLUMNS, StepFunction, bm_verify, carnot_bm, lemma31_verify,
                           pl_verify, sharpness_csv_rows, sharpness_scan)
from .polynomial import Polynomial
from .rational import q, qstr
from .set_arith import DEFAULT_BUDGET

EXIT_OK, EXIT_UNEXPECTED, EXIT_INVALID, EXIT_IO, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
BUDGET_ENV = "NILBM_BUDGET"


class InputError(Exception):
    """Unreadable or malformed input file (exit 3)."""


class CheckFailed(Exception):
    """A structural verification did not pass (exit 2)."""


# -- input resolution --------------------------------------------------------------


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _parse(path: str, parser):
    doc = _read_json(path)
    try:
        return parser(doc)
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _constants(args) -> lie_core.StructureConstants:
    if getattr(args, "file", None):
        return _parse(args.file, lambda d: lie_core.constants_from_dict(d, os.path.basename(args.file)))
    if getattr(args, "group", None):
        return lie_core.catalog(args.group)
    raise InputError("give --group NAME or --file CONSTANTS.json")


def _law(args, need_dilation: bool = False) -> tuple[ProductLaw, DilationSpec | None]:
    """Law from --law, else derived from --group/--file (stratified when possible)."""
    if getattr(args, "law", None):
        law = _parse(args.law, law_from_dict)
        spec = DilationSpec(law.weights) if law.weights else None
    else:
        sc = _constants(args)
        try:
            law, spec = carnot_law(sc)
        except NotStratifiable:
            law, spec = derive_bch(sc), None
    if need_dilation and spec is None:
        raise CheckFailed("this command needs a stratified (Carnot) law")
    return law, spec


def _union(path: str, d: int):
    u = _parse(path, union_from_dict)
    if u.dim != d:
        raise InputError(f"{path}: set of dimension {u.dim} does not match the law dimension {d}")
    return u


def _interval(text: str) -> tuple[Fraction, Fraction]:
    try:
        a, b = (q(x.strip()) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from exc
    if a > b:
        raise argparse.ArgumentTypeError(f"empty interval {text!r}")
    return a, b


def _rational(text: str) -> Fraction:
    try:
        return q(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _positive_rational(text: str) -> Fraction:
    x = _rational(text)
    if x <= 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return x


def _budget(args) -> int:
    if args.budget is not None:
        return args.budget
    env = os.environ.get(BUDGET_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise InputError(f"{BUDGET_ENV}={env!r} is not an integer") from exc
        if value < 1:
            raise InputError(f"{BUDGET_ENV} must be at least 1")
        return value
    return DEFAULT_BUDGET


# -- output --------------------------------------------------------------------------


def _config(args) -> dict:
    skip = {"func", "output", "format"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        if isinstance(v, Fraction):
            v = qstr(v)
        elif isinstance(v, tuple):
            v = [qstr(x) if isinstance(x, Fraction) else x for x in v]
        elif isinstance(v, list):
            v = [qstr(x) if isinstance(x, Fraction) else x for x in v]
        out[k] = v
    return out


def results_json(results: list) -> str:
    """Canonical rendering of the results section (the determinism contract)."""
    return json.dumps(results, sort_keys=True, separators=(",", ":"))


def envelope(args, law: ProductLaw | None, results: list, inputs: dict | None = None) -> dict:
    config = _config(args)
    if inputs:
        config["inputs"] = inputs
    return {"tool": "nilbm", "version": __version__, "config": config,
            "law_digest": law_digest(law) if law is not None else None,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "results": json.loads(results_json(results))}


def _emit(args, text: str) -> None:
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {args.output}: {exc.strerror or exc}") from exc
    else:
        sys.stdout.write(text)


def _csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _summary_rows(results: list[dict]) -> list[list[str]]:
    rows = [["tag", "verdict", "lower", "upper", "depth"]]
    for r in results:
        kind = r.get("verdict", {}).get("kind", "")
        lo = (r.get("lower") or {}).get("value", "")
        hi = (r.get("upper") or {}).get("value", "")
        rows.append([r.get("tag", ""), kind, lo, hi, "" if r.get("depth") is None else str(r["depth"])])
    return rows


def _finish(args, law, results: list[dict], kinds: list[str], inputs=None, csv_rows=None) -> int:
    fmt = args.format or ("csv" if csv_rows is not None else "json")
    if fmt == "csv":
        _emit(args, _csv(csv_rows if csv_rows is not None else _summary_rows(results)))
    else:
        _emit(args, json.dumps(envelope(args, law, results, inputs), sort_keys=True, indent=2) + "\n")
    if args.strict and INCONCLUSIVE in kinds:
        return EXIT_INCONCLUSIVE
    if args.expect and any(k != args.expect for k in kinds):
        return EXIT_UNEXPECTED
    return EXIT_OK


# -- commands ------------------------------------------------------------------------


def _matrix(rows) -> list[list[str]]:
    return [[qstr(x) for x in row] for row in rows]


def cmd_algebra(args) -> int:
    sc = _constants(args)
    lie_core.validate(sc)
    series = lie_core.lower_central_series(sc)
    malcev = lie_core.malcev_basis(sc)
    doc = {"name": sc.name, "dim": sc.dim, "central_series_dims": list(series.dims), "step": series.step,
           "malcev_change": _matrix(malcev.change), "malcev_marks": list(malcev.marks)}
    try:
        strat = lie_core.stratify(sc)
        doc.update({"stratified": True, "layer_dims": list(strat.dims), "weights": list(strat.weights),
                    "Q": strat.Q, "adapted_change": _matrix(strat.change)})
    except NotStratifiable as exc:
        doc.update({"stratified": False, "reason": exc.reason})
    if args.format == "csv":
        _emit(args, _csv([["name", "dim", "step", "central_series_dims", "Q"],
                          [sc.name, str(sc.dim), str(series.step), " ".join(map(str, series.dims)),
                           str(doc.get("Q", ""))]]))
    else:
        _emit(args, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def cmd_law(args) -> int:
    sc = _constants(args)
    try:
        law, _ = carnot_law(sc)
    except NotStratifiable:
        law = derive_bch(sc)
    checks = {"triangular": verify_triangular(law), "first_layer": verify_first_layer(law),
              "associativity": verify_associativity(law, samples=args.samples, seed=args.seed)}
    for line in law.describe():
        print(line, file=sys.stderr)
    failed = [name for name, res in checks.items() if not res]
    for name in failed:
        print(f"check {name} failed: {checks[name].detail} {checks[name].offending}", file=sys.stderr)
    if failed:
        raise CheckFailed(", ".join(failed))
    _emit(args, dump_law(law) + "\n")
    return EXIT_OK


def cmd_bm(args) -> int:
    law, _ = _law(args)
    A, B = _union(args.A, law.d), _union(args.B, law.d)
    m = args.m or law.d
    r = bm_verify(A, B, law, m, args.tol, args.max_depth, _budget(args))
    return _finish(args, law, [r.to_dict()], [r.kind], {"A": union_to_dict(A), "B": union_to_dict(B)})


def cmd_sharpness(args) -> int:
    law, spec = _law(args, need_dilation=True)
    rows = sharpness_scan(law, spec, args.eps, args.tol, args.max_depth, _budget(args))
    return _finish(args, law, [r.to_dict() for r in rows], [r.kind for r in rows],
                   csv_rows=sharpness_csv_rows(rows))


def cmd_pl(args) -> int:
    if args.group or args.file or args.law:
        law, spec = _law(args)
    else:
        d = args.dim or 1
        law = custom_law(d, [Polynomial.constant(2 * d, 0)] * d, f"abelian({d})")
        spec = DilationSpec((1,) * d)
    fns = {k: _parse(getattr(args, k), StepFunction.from_dict) for k in ("f", "g", "h")}
    for k, fn in fns.items():
        if fn.dim != law.d:
            raise InputError(f"--{k}: function of dimension {fn.dim} does not match the law dimension {law.d}")
    r = pl_verify(fns["f"], fns["g"], fns["h"], args.alpha, law, args.depth,
                  dilations=spec if args.dilated else None)
    return _finish(args, law, [r.to_dict()], [r.kind], {k: f.to_dict() for k, f in fns.items()})


def cmd_lemma31(args) -> int:
    law, _ = _law(args)
    At, Bt = _union(args.A_tail, law.d - 1), _union(args.B_tail, law.d - 1)
    r = lemma31_verify(args.I, args.J, At, Bt, law, args.tol, args.max_depth, args.grid, _budget(args))
    doc = r.to_dict()
    ok = r.inequality and (r.equality is not False)
    doc["verdict"] = {"kind": "holds" if ok else INCONCLUSIVE}
    return _finish(args, law, [doc], [doc["verdict"]["kind"]],
                   {"A_tail": union_to_dict(At), "B_tail": union_to_dict(Bt)})


def cmd_carnot(args) -> int:
    law, spec = _law(args, need_dilation=True)
    A, B = _union(args.A, law.d), _union(args.B, law.d)
    r = carnot_bm(A, B, args.alpha, law, spec, args.form, args.tol, args.max_depth, _budget(args))
    return _finish(args, law, [r.to_dict()], [r.kind], {"A": union_to_dict(A), "B": union_to_dict(B)})


# -- parser ----------------------------------------------------------------------------


def _add_group(p, law_file: bool = True):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--group", help="catalog name: " + ", ".join(lie_core.CATALOG_NAMES))
    g.add_argument("--file", help="structure-constants JSON file")
    if law_file:
        g.add_argument("--law", help="law JSON file written by the 'law' command")


def _add_run(p, depth: int = 7, tol: str = "1/100"):
    p.add_argument("--tol", type=_positive_rational, default=q(tol), help=f"relative gap tolerance (default {tol})")
    p.add_argument("--max-depth", type=_nonneg_int, default=depth, help=f"subdivision depth cap (default {depth})")
    p.add_argument("--budget", type=_positive_int, help=f"cell-pair cap (default ${BUDGET_ENV} or {DEFAULT_BUDGET})")
    _add_out(p)


def _add_out(p):
    p.add_argument("--output", "-o", help="output path (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), help="report format")
    p.add_argument("--expect", choices=("holds", "fails", "inconclusive"), help="exit 1 unless every verdict matches")
    p.add_argument("--strict", action="store_true", help="exit 4 if any verdict is inconclusive")


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _eps_list(text: str) -> list[Fraction]:
    return [_rational(x.strip()) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nilbm", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"nilbm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("algebra", help="validate an algebra; print central series, step and Q")
    _add_group(p, law_file=False)
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=("json", "csv"))
    p.set_defaults(func=cmd_algebra)

    p = sub.add_parser("law", help="derive the group law, run structural checks, write the law file")
    _add_group(p, law_file=False)
    p.add_argument("--samples", type=_positive_int, default=1000, help="associativity samples (default 1000)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_law)

    p = sub.add_parser("bm", help="Brunn-Minkowski check |A*B|^(1/m) >= |A|^(1/m) + |B|^(1/m)")
    _add_group(p)
    p.add_argument("--A", required=True, help="set JSON file")
    p.add_argument("--B", required=True, help="set JSON file")
    p.add_argument("--m", type=_positive_int, help="exponent (default: topological dimension)")
    _add_run(p)
    p.set_defaults(func=cmd_bm)

    p = sub.add_parser("sharpness", help="exponent-Q scan over A = B = [0,eps]^(d-1) x [0,1]",
                       description="CSV columns: " + ", ".join(SHARPNESS_COLUMNS)
                       + ". lower/upper/rhs are exact rationals (rhs empty when irrational); "
                       "*_decimal columns are advisory.")
    _add_group(p)
    p.add_argument("--eps", type=_eps_list, required=True, help="comma-separated rationals in (0, 1]")
    _add_run(p, depth=4)
    p.set_defaults(func=cmd_sharpness)

    p = sub.add_parser("pl", help="Prekopa-Leindler check for step functions")
    _add_group(p)
    p.add_argument("--dim", type=_positive_int, help="abelian dimension when no group is given (default 1)")
    p.add_argument("--alpha", type=_rational, required=True)
    for k in ("f", "g", "h"):
        p.add_argument(f"--{k}", required=True, help="step-function JSON file")
    p.add_argument("--depth", type=_nonneg_int, default=0, help="subdivision depth of the hypothesis check")
    p.add_argument("--dilated", action="store_true", help="use the dilated hypothesis and constant")
    _add_out(p)
    p.set_defaults(func=cmd_pl)

    p = sub.add_parser("lemma31", help="first-coordinate reduction for A = I x A~, B = J x B~")
    _add_group(p)
    p.add_argument("--I", type=_interval, required=True, help="lo,hi")
    p.add_argument("--J", type=_interval, required=True, help="lo,hi")
    p.add_argument("--A-tail", dest="A_tail", required=True)
    p.add_argument("--B-tail", dest="B_tail", required=True)
    p.add_argument("--grid", type=_positive_int, default=5, help="grid points on I+J (default 5)")
    _add_run(p, depth=6, tol="1/50")
    p.set_defaults(func=cmd_lemma31)

    p = sub.add_parser("carnot", help="dilated Brunn-Minkowski forms on a Carnot group")
    _add_group(p)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--alpha", type=_rational, required=True)
    p.add_argument("--form", choices=("additive", "multiplicative"), default="additive")
    _add_run(p)
    p.set_defaults(func=cmd_carnot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"nilbm: {exc}", file=sys.stderr)
        return EXIT_IO
    except UnknownGroup as exc:
        print(f"nilbm: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (AlgebraError, CheckFailed) as exc:
        print(f"nilbm: invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NilbmError as exc:
        print(f"nilbm: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
