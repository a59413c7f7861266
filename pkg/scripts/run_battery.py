"""Run every test on the built-in corpus and cross-check each truth label
against partial sums.

    python3 scripts/run_battery.py [--out battery.json] [--tests all]
"""

import argparse
import json

from serieslab.battery import TEST_NAMES, json_safe, parse_test_list, run_battery
from serieslab.corpus import builtin_corpus, oracle_consistency, partial_sum_trace


def main():
    ap = argparse.ArgumentParser(description="corpus battery with partial-sum cross-check")
    ap.add_argument("--tests", default="all", help=f"comma list or 'all' ({', '.join(TEST_NAMES)})")
    ap.add_argument("--n-max", type=int, default=2**17, help="largest partial-sum index")
    ap.add_argument("--out", help="also write the JSON battery report here")
    args = ap.parse_args()

    corpus = builtin_corpus()
    report = run_battery(corpus, parse_test_list(args.tests))
    print(f"{'entry':22s} {'truth':10s} {'oracle':11s} {'S_N':>14s}  decisive verdicts")
    for row in report.rows:
        trace = partial_sum_trace(row.entry.spec, args.n_max)
        oracle = oracle_consistency(row.entry, trace)
        decisive = ", ".join(f"{r.name}={r.verdict.variant[0].upper()}" for r in row.reports if r.verdict.decisive)
        print(f"{row.entry.id:22s} {row.entry.truth:10s} {oracle.status:11s} {trace.sums[-1]:14.6g}  {decisive or '-'}")

    print("\nmissing coverage:", report.missing_coverage() or "none")
    print("soundness violations:", len(report.violations))
    for v in report.violations:
        print(f"  {v.entry_id}: {v.test} said {v.verdict}, truth {v.truth}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(json_safe(report), fh, indent=2)
            fh.write("\n")
    return 1 if report.violations else 0


if __name__ == "__main__":
    raise SystemExit(main())
