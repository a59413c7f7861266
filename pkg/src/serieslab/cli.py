"""serieslab command-line interface.

Usage:
    serieslab classify --term "1/(n*ln(n)^2)"            run every test on one series
    serieslab classify --term "1/n" --tests second_raabe --json
    serieslab battery --corpus builtin                   run every test on the corpus
    serieslab lemma --p 2 --extrapolate                  log-p functional convergence table

Exit codes:
    classify: 0 decisive, 2 undecided or inconclusive, 1 error, 3 conflicting verdicts
    battery:  0 iff no decisive verdict contradicts a truth label, else 4; 1 on error
    lemma:    0, or 1 on error
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .battery import (
    TEST_NAMES,
    RunConfig,
    VerdictConflict,
    classify_series,
    json_safe,
    parse_test_list,
    run_battery,
)
from .classical import AUX_CATALOG
from .corpus import builtin_corpus
from .expr import DomainError, ExprSyntaxError, SeriesSpec, check_positivity
from .limits import estimate_limits
from .second import lemma_functional
from .sequences import IndexSchedule
from .verdict import DECISIVE

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNDECIDED = 2
EXIT_CONFLICT = 3
EXIT_UNSOUND = 4

LN2 = math.log(2.0)


class CliError(Exception):
    pass


def dumps(obj) -> str:
    return json.dumps(json_safe(obj), indent=2, allow_nan=False) + "\n"


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def schedule_from_args(args) -> IndexSchedule:
    try:
        return IndexSchedule(n0=args.n0, growth=args.growth, count=args.samples, window=args.window)
    except ValueError as exc:
        raise CliError(f"bad schedule: {exc}") from None


def config_from_args(args) -> RunConfig:
    if not args.lambda_scale > 0:
        raise CliError("--lambda must be positive")
    if not args.p_exp > 1:
        raise CliError("--p-exp must exceed 1")
    return RunConfig(
        schedule=schedule_from_args(args),
        lambda_scale=args.lambda_scale,
        p_exp=args.p_exp,
        gauss_lambda=args.gauss_lambda,
        aux=args.aux,
    )


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


# --------------------------------------------------------------------------
# classify


def _key_evidence(ev: dict) -> str:
    if "second_raabe" in ev:
        sr = ev["second_raabe"]
        return f"m={_fmt(sr['m'])} M={_fmt(sr['M'])} threshold={_fmt(sr['threshold'])}"
    if "second_ratio" in ev:
        return f"l={_fmt(ev['second_ratio']['l'])} L={_fmt(ev['second_ratio']['L'])}"
    if "estimate" in ev:
        e = ev["estimate"]
        return f"liminf={_fmt(e['liminf'])} limsup={_fmt(e['limsup'])} band={_fmt(e['band'])}"
    if "precondition" in ev:
        return f"precondition={ev['precondition']}"
    return ""


def render_classify(report) -> str:
    lines = [f"term: {report.term}   first_index: {report.first_index}"]
    s = report.schedule
    lines.append(f"schedule: n0={s.n0} growth={s.growth} samples={s.count} window={s.window}")
    lines.append("")
    for t in report.tests:
        lines.append(f"  {t.name:20s} {t.verdict.variant:13s} {_key_evidence(t.verdict.evidence)}")
        for note in t.verdict.notes:
            lines.append(f"  {'':20s}   - {note}")
    verdict, decided_by = report.overall
    lines.append("")
    lines.append(f"overall: {verdict} (decided by {', '.join(decided_by) or 'none'})")
    return "\n".join(lines) + "\n"


def cmd_classify(args) -> int:
    try:
        spec = SeriesSpec.from_source(args.term, args.first_index)
    except ExprSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    config = config_from_args(args)
    names = parse_test_list(args.tests)
    schedule = config.schedule
    head = range(spec.first_index, max(spec.first_index, schedule.n0))
    probe = sorted(set(head) | {n for n in schedule.indices if n >= spec.first_index})
    bad = check_positivity(spec, probe, doubled=True)
    if bad is not None:
        print(f"error: positivity violation at n={bad}", file=sys.stderr)
        return EXIT_ERROR

    report = classify_series(spec, names, config, timing=args.timing)
    try:
        verdict, _ = report.overall
    except VerdictConflict as exc:
        print(f"error: {exc}; this is a soundness bug", file=sys.stderr)
        return EXIT_CONFLICT
    emit(dumps(report) if args.json else render_classify(report), args.out)
    return EXIT_OK if verdict in DECISIVE else EXIT_UNDECIDED


# --------------------------------------------------------------------------
# battery

ABBREV = {"converges": "C", "diverges": "D", "inconclusive": "I", "undecided": ".", "inapplicable": "x"}


def render_battery(report) -> str:
    names = report.names
    width = max(len(r.entry.id) for r in report.rows) + 2
    lines = ["legend: C converges, D diverges, I inconclusive, . undecided, x inapplicable", ""]
    for i, n in enumerate(names):
        lines.append(f"  [{i:2d}] {n}")
    lines.append("")
    lines.append(f"{'entry':{width}s}truth  " + " ".join(f"{i:>2d}" for i in range(len(names))))
    for row in report.rows:
        cells = " ".join(f"{ABBREV[r.verdict.variant]:>2s}" for r in row.reports)
        lines.append(f"{row.entry.id:{width}s}{row.entry.truth[0].upper():5s}  {cells}")
    lines.append("")
    lines.append("coverage (verdict counts per test):")
    cov = report.coverage()
    for n in names:
        counts = " ".join(f"{v}={c}" for v, c in cov[n].items())
        lines.append(f"  {n:20s} {counts}")
    viol = report.violations
    lines.append("")
    lines.append(f"soundness violations: {len(viol)}")
    for v in viol:
        lines.append(f"  {v.entry_id}: {v.test} said {v.verdict}, truth is {v.truth}")
    return "\n".join(lines) + "\n"


def cmd_battery(args) -> int:
    if args.corpus != "builtin":
        raise CliError(f"unknown corpus {args.corpus!r}; only 'builtin' is available")
    config = config_from_args(args)
    names = parse_test_list(args.tests)
    report = run_battery(builtin_corpus(), names, config, timing=args.timing)
    emit(dumps(report) if args.json else render_battery(report), args.out)
    return EXIT_OK if not report.violations else EXIT_UNSOUND


# --------------------------------------------------------------------------
# lemma


def lemma_table(p: float, lambda_scale: float, schedule: IndexSchedule, extrapolate: bool) -> dict:
    target = p * LN2 / 2
    rows = []
    for n in schedule.indices:
        e1 = lemma_functional(p, lambda_scale, "eq1", n)
        e2 = lemma_functional(p, lambda_scale, "eq2", n)
        rows.append({"n": n, "eq1": e1, "eq2": e2, "err1": abs(e1 - target), "err2": abs(e2 - target)})
    out = {"p": p, "lambda": lambda_scale, "target": target, "schedule": schedule.to_json(), "rows": rows}
    if extrapolate:
        for which in ("eq1", "eq2"):
            est = estimate_limits(
                lambda n: lemma_functional(p, lambda_scale, which, n), schedule, True, lambda_scale
            )
            out[f"extrapolated_{which}"] = {**est.to_json(), "error": abs(est.center - target)}
    return out


def render_lemma(table: dict) -> str:
    lines = [f"p={_fmt(table['p'])} lambda={_fmt(table['lambda'])} target p*ln2/2={table['target']:.6f}", ""]
    lines.append(f"{'n':>16s} {'eq1':>14s} {'eq2':>14s} {'|err1|':>11s} {'|err2|':>11s}")
    for r in table["rows"]:
        lines.append(f"{r['n']:16d} {r['eq1']:14.9f} {r['eq2']:14.9f} {r['err1']:11.3e} {r['err2']:11.3e}")
    for which in ("eq1", "eq2"):
        key = f"extrapolated_{which}"
        if key in table:
            e = table[key]
            lines.append(
                f"extrapolated {which}: {e['liminf']:.9f} (band {e['band']:.2e}, error {e['error']:.2e},"
                f" fitted={e['extrapolated']})"
            )
    return "\n".join(lines) + "\n"


def cmd_lemma(args) -> int:
    if not args.lambda_scale > 0:
        raise CliError("--lambda must be positive")
    schedule = schedule_from_args(args)
    if schedule.n0 < 2:
        raise CliError("--n0 must be at least 2 for the log-p functionals")
    if args.lambda_scale * schedule.n0 <= 1:
        raise CliError("--lambda * --n0 must exceed 1 so that ln(lambda n) > 0")
    table = lemma_table(args.p, args.lambda_scale, schedule, args.extrapolate)
    emit(dumps(table) if args.json else render_lemma(table), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def add_schedule_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("sampling schedule")
    g.add_argument("--n0", type=int, default=64, help="first sampled index (default 64)")
    g.add_argument("--growth", type=float, default=1.5, help="geometric growth factor (default 1.5)")
    g.add_argument("--samples", type=int, default=64, help="number of distinct indices (default 64)")
    g.add_argument("--window", type=int, default=12, help="trailing window size (default 12)")


def add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="emit a JSON report")
    p.add_argument("--out", metavar="PATH", help="write the report to PATH instead of stdout")


def add_test_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tests", default="all", help=f"comma list or 'all' ({', '.join(TEST_NAMES)})")
    p.add_argument("--lambda", dest="lambda_scale", type=float, default=1.0, help="scale in ln(lambda n)")
    p.add_argument("--p-exp", type=float, default=2.0, help="log exponent of the second Gauss remainder")
    p.add_argument("--gauss-lambda", type=float, default=1.0, help="power exponent of the Gauss remainder")
    p.add_argument("--aux", choices=sorted(AUX_CATALOG), help="auxiliary sequence for Kummer-type tests")
    p.add_argument("--timing", action="store_true", help="record wall time per test (breaks byte-identical output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="serieslab", description="Convergence tests for positive-term series.")
    parser.add_argument("--version", action="version", version=f"serieslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="run the tests on one series")
    p.add_argument("--term", required=True, help='term a(n), e.g. "1/(n*ln(n)^2)"')
    p.add_argument("--first-index", type=int, default=None, help="first summation index")
    add_test_flags(p)
    add_schedule_flags(p)
    add_output_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("battery", help="run the tests on the reference corpus")
    p.add_argument("--corpus", default="builtin", help="corpus name (only 'builtin')")
    add_test_flags(p)
    add_schedule_flags(p)
    add_output_flags(p)
    p.set_defaults(func=cmd_battery)

    p = sub.add_parser("lemma", help="convergence table of the log-p second-ratio functionals")
    p.add_argument("--p", type=float, required=True, help="log exponent p")
    p.add_argument("--lambda", dest="lambda_scale", type=float, default=1.0, help="scale in ln(lambda n)")
    p.add_argument("--extrapolate", action="store_true", help="also print the extrapolated limit")
    add_schedule_flags(p)
    add_output_flags(p)
    p.set_defaults(func=cmd_lemma)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit 2; the contract says 1
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (CliError, ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
