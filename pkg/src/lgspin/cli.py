"""Command-line front end.

Subcommands::

    lgspin evaluate  --j 10 --quantity lgi --lambda 0.7 --engine both
    lgspin threshold --j 10 --quantity wlgi --variable lambda
    lgspin table 6 --output csv --target-diff
    lgspin sweep --j 1,10,100 --lambda 0.5,1 --quantity lgi,nsit

Output is CSV (default) or JSON.  CSV always starts with a header row and
uses ``.`` as decimal separator; JSON is ``{"rows": [...], "metadata": {...}}``.
Numbers are printed with 6 significant digits unless ``--precision`` says
otherwise; ``table`` defaults to the number of decimals each target value is
quoted to.

Exit codes: 0 success, 1 table cells off target (with ``--target-diff``),
2 invalid parameter, 3 closed form unavailable, 4 spin too large or a
numerical self-check failed.
"""

from __future__ import annotations

import argparse
import csv
import decimal
import io
import json
import math
import os
import sys

from . import __version__
from .errors import ClosedFormUnavailable, DimensionOverflowError, DomainError, NumericalDegeneracyError
from .quantities import Engine, Quantity
from .spin_core import as_spin
from .sweep import COMPARE_SLACK, ThresholdQuery, Variable, evaluate_point, find_threshold, reproduce_table, sweep

EXIT_OK = 0
EXIT_OFF_TARGET = 1
EXIT_INVALID = 2
EXIT_NO_CLOSED_FORM = 3
EXIT_NUMERICAL = 4

EVALUATE_COLUMNS = ["j", "lambda", "v", "x", "quantity", "engine", "value", "violation", "engine_diff"]
THRESHOLD_COLUMNS = ["j", "lambda", "v", "x", "quantity", "variable", "engine", "threshold",
                     "sign_changes", "anomaly", "engine_diff"]
TABLE_COLUMNS = ["table", "quantity", "kind", "j", "lambda", "v", "x", "value", "closed", "engine_diff",
                 "target", "deviation", "matches"]
SWEEP_COLUMNS = ["j", "lambda", "v", "x", "quantity", "engine", "value", "violation"]

class Formatter:
    """Deterministic number formatting shared by CSV and JSON output."""

    def __init__(self, precision: int | None, fixed: bool):
        self.precision = precision
        self.fixed = fixed

    def number(self, value, decimals: int | None = None) -> str:
        if value is None:
            return ""
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if self.fixed:
            digits = decimals if self.precision is None else self.precision
            # half-up after dropping float noise, so 0.625 prints as 0.63 like the reference tables
            quantum = decimal.Decimal(1).scaleb(-digits)
            exact = decimal.Decimal(f"{value:.12g}")
            text = f"{exact.quantize(quantum, rounding=decimal.ROUND_HALF_UP):f}"
        else:
            text = f"{value:.{self.precision or 6}g}"
        return "0" + text[2:] if text.startswith("-0") and float(text) == 0 else text

    @staticmethod
    def small(value) -> str:
        return "" if value is None else f"{float(value):.3e}"


def _spin_text(j) -> str:
    if isinstance(j, float) and math.isinf(j):
        return "inf"
    s = as_spin(j)
    return str(s.numerator) if s.denominator == 1 else f"{s.numerator}/{s.denominator}"


def _emit(rows: list[dict], columns: list[str], metadata: dict, output: str, stream) -> None:
    if output == "json":
        parsed = []
        for row in rows:
            item = {}
            for col in columns:
                text = row.get(col, "")
                item[col] = _json_value(col, text)
            parsed.append(item)
        json.dump({"rows": parsed, "metadata": metadata}, stream, indent=2, sort_keys=False)
        stream.write("\n")
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    writer.writerows(rows)
    stream.write(buf.getvalue())


def _json_value(col: str, text):
    if isinstance(text, (bool, int)):
        return text
    if text == "" or text is None:
        return None
    if col in ("quantity", "engine", "kind", "variable", "j"):
        return text
    if text in ("inf", "-inf", "none", "no violation"):
        return text
    if col in ("x", "table", "sign_changes"):
        return int(text)
    return float(text)


def _parse_list(text: str, convert):
    """Comma-separated values; ``start:stop[:step]`` expands to an inclusive range."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ":" in part and "/" not in part:
            bits = [float(b) for b in part.split(":")]
            start, stop = bits[0], bits[1]
            step = bits[2] if len(bits) > 2 else 1.0
            if step <= 0:
                raise DomainError("range", f"step must be positive in {part!r}")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            out.extend(convert(repr(round(start + k * step, 12))) for k in range(n))
        else:
            out.append(convert(part))
    if not out:
        raise DomainError("list", f"empty list {text!r}")
    return out


def _quantities(text: str) -> list[Quantity]:
    if text == "all":
        return list(Quantity)
    try:
        return [Quantity(q.strip().lower()) for q in text.split(",")]
    except ValueError:
        raise DomainError("quantity", f"{text!r}; choose from lgi, wlgi, nsit, all") from None


def _unit_float(name):
    def convert(text):
        try:
            value = float(text)
        except ValueError:
            raise DomainError(name, f"{text!r} is not a number") from None
        if not 0.0 <= value <= 1.0:
            raise DomainError(name, f"{value} is outside [0, 1]")
        return value

    convert.__name__ = name
    return convert


def _int(name):
    def convert(text):
        try:
            value = float(text)
        except ValueError:
            raise DomainError(name, f"{text!r} is not an integer") from None
        if value != int(value):
            raise DomainError(name, f"{text!r} is not an integer")
        return int(value)

    convert.__name__ = name
    return convert


def _engines(name: str) -> list[Engine]:
    return [Engine.SIM, Engine.CLOSED_FORM] if name == "both" else [Engine(name)]


# commands -----------------------------------------------------------------


def _cmd_evaluate(args, fmt: Formatter, out) -> int:
    j = as_spin(args.j)
    rows = []
    for q in _quantities(args.quantity):
        reports = [evaluate_point(j, q, args.lam, args.v, args.x, e, args.j_max) for e in _engines(args.engine)]
        diff = abs(reports[0].value - reports[1].value) if len(reports) == 2 else None
        for rep in reports:
            rows.append({
                "j": _spin_text(j), "lambda": fmt.number(rep.lam), "v": fmt.number(rep.v), "x": rep.x,
                "quantity": rep.quantity.value, "engine": rep.engine.value,
                "value": fmt.number(rep.value), "violation": fmt.number(rep.violation),
                "engine_diff": fmt.small(diff),
            })
    meta = {"command": "evaluate", "engine": args.engine}
    _emit(rows, EVALUATE_COLUMNS, meta, args.output, out)
    return EXIT_OK


def _cmd_threshold(args, fmt: Formatter, out) -> int:
    j = as_spin(args.j)
    rows = []
    for q in _quantities(args.quantity):
        results = []
        for engine in _engines(args.engine):
            query = ThresholdQuery(q, j, Variable(args.variable), x=args.x, engine=engine, lam=args.lam, v=args.v)
            results.append(find_threshold(query, tol=args.tol, step=args.step, j_max=args.j_max))
        values = [r.value for r in results]
        diff = abs(values[0] - values[1]) if len(values) == 2 and None not in values else None
        for res in results:
            rows.append({
                "j": _spin_text(j), "lambda": fmt.number(args.lam), "v": fmt.number(args.v), "x": args.x,
                "quantity": q.value, "variable": res.query.variable.value, "engine": res.query.engine.value,
                "threshold": "none" if res.value is None else fmt.number(res.value),
                "sign_changes": res.sign_changes, "anomaly": res.anomaly, "engine_diff": fmt.small(diff),
            })
    meta = {"command": "threshold", "tol": args.tol, "step": args.step}
    _emit(rows, THRESHOLD_COLUMNS, meta, args.output, out)
    return EXIT_OK


def _cmd_table(args, fmt: Formatter, out) -> int:
    result = reproduce_table(args.n, workers=args.workers, tol=args.tol, j_max=args.j_max)
    rows = []
    for r in result.rows:
        dev_digits = r.decimals + 2
        rows.append({
            "table": r.table, "quantity": r.quantity, "kind": r.kind, "j": _spin_text(r.j),
            "lambda": fmt.number(r.lam, 2), "v": fmt.number(r.v, 2), "x": r.x,
            "value": fmt.number(r.value, r.decimals), "closed": fmt.number(r.closed, r.decimals),
            "engine_diff": fmt.small(r.engine_diff),
            "target": "no violation" if r.target is None else fmt.number(r.target, r.decimals),
            "deviation": fmt.number(r.deviation, dev_digits), "matches": r.matches,
        })
    meta = {k: v for k, v in result.metadata.items() if args.timing or k != "wall_time"}
    meta["command"] = "table"
    _emit(rows, TABLE_COLUMNS, meta, args.output, out)
    if args.diff:
        failed = [r for r in result.rows if not r.matches]
        for r in result.rows:
            status = "ok " if r.matches else "OFF"
            dev = "violation<=0 expected" if r.target is None else f"deviation {r.deviation:+.5f}"
            print(f"[{status}] table {r.table} {r.quantity:<4} j={_spin_text(r.j):>4} lambda={r.lam:g} "
                  f"v={r.v:g} x={r.x}: {r.value:.5f} vs {r.target} ({dev}, tol {r.tolerance}+{COMPARE_SLACK:g})",
                  file=sys.stderr)
        print(f"{len(result.rows) - len(failed)}/{len(result.rows)} cells within tolerance", file=sys.stderr)
        return EXIT_OFF_TARGET if failed else EXIT_OK
    return EXIT_OK


def _cmd_sweep(args, fmt: Formatter, out) -> int:
    js = _parse_list(args.j, as_spin)
    lams = _parse_list(args.lam, _unit_float("lambda"))
    vs = _parse_list(args.v, _unit_float("v"))
    xs = _parse_list(args.x, _int("x"))
    quantities = _quantities(args.quantity)
    rows = []
    for engine in _engines(args.engine):
        result = sweep(js, quantities, lams, vs, xs, engine=engine, workers=args.workers, j_max=args.j_max)
        for rep in result.rows:
            rows.append({
                "j": _spin_text(rep.j), "lambda": fmt.number(rep.lam), "v": fmt.number(rep.v), "x": rep.x,
                "quantity": rep.quantity.value, "engine": rep.engine.value,
                "value": fmt.number(rep.value), "violation": fmt.number(rep.violation),
            })
    meta = {"command": "sweep", "engine": args.engine, "points": len(rows)}
    _emit(rows, SWEEP_COLUMNS, meta, args.output, out)
    return EXIT_OK


# parser -------------------------------------------------------------------


def _default_workers() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("csv", "json"), default="csv")
    common.add_argument("--precision", type=int, default=None,
                        help="significant digits (decimals for `table`); default 6 / per-table")
    common.add_argument("--j-max", dest="j_max", default=None,
                        help="largest spin accepted (default 500 or $LGSPIN_J_MAX)")
    common.add_argument("--workers", type=int, default=_default_workers())

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--j", required=True, help="spin, e.g. 10 or 3/2")
    point.add_argument("--lambda", dest="lam", type=_unit_float("lambda"), default=1.0, help="sharpness (default 1)")
    point.add_argument("--v", type=_unit_float("v"), default=1.0, help="visibility (default 1)")
    point.add_argument("--x", type=_int("x"), default=0, help="grouping parameter (default 0)")
    point.add_argument("--quantity", default="all", help="lgi, wlgi, nsit, comma list or all")
    point.add_argument("--engine", choices=("sim", "closed", "both"), default="sim")

    parser = argparse.ArgumentParser(prog="lgspin", description="Macrorealism violations for spin-j precession.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", parents=[common, point], help="evaluate one parameter point")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("threshold", parents=[common, point], help="threshold sharpness or visibility")
    p.add_argument("--variable", choices=("lambda", "visibility"), default="lambda")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--step", type=float, default=0.01, help="scan step for lambda")
    p.set_defaults(func=_cmd_threshold)

    p = sub.add_parser("table", parents=[common], help="regenerate reference table 1-10")
    p.add_argument("n", type=int, choices=range(1, 11), metavar="N")
    p.add_argument("--target-diff", "--paper-diff", dest="diff", action="store_true",
                   help="report each cell's deviation from its target and exit 1 if any is out of tolerance")
    p.add_argument("--tol", type=float, default=1e-6, help="threshold refinement tolerance")
    p.add_argument("--timing", action="store_true", help="include wall time in JSON metadata")
    p.set_defaults(func=_cmd_table)

    p = sub.add_parser("sweep", parents=[common], help="evaluate a parameter grid")
    p.add_argument("--j", required=True, help="comma list or start:stop[:step]")
    p.add_argument("--lambda", dest="lam", default="1")
    p.add_argument("--v", default="1")
    p.add_argument("--x", default="0")
    p.add_argument("--quantity", default="all")
    p.add_argument("--engine", choices=("sim", "closed", "both"), default="sim")
    p.set_defaults(func=_cmd_sweep)
    return parser


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except DomainError as exc:
        print(f"lgspin: invalid parameter {exc}", file=sys.stderr)
        return EXIT_INVALID
    fmt = Formatter(args.precision, fixed=args.command == "table")
    try:
        if args.j_max is not None:
            args.j_max = as_spin(args.j_max)
        if args.precision is not None and args.precision < 1 and args.command != "table":
            raise DomainError("precision", "must be at least 1")
        if args.workers < 1:
            raise DomainError("workers", "must be at least 1")
        return args.func(args, fmt, out)
    except ClosedFormUnavailable as exc:
        print(f"lgspin: {exc}", file=sys.stderr)
        return EXIT_NO_CLOSED_FORM
    except DomainError as exc:
        print(f"lgspin: invalid parameter {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (DimensionOverflowError, NumericalDegeneracyError) as exc:
        print(f"lgspin: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
