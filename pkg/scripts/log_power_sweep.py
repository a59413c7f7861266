"""Second Raabe verdicts on b(n) = 1/(n (ln n)^(2 beta/ln 2)) across beta.

The family converges iff beta > ln2/2; its functionals tend to beta. The sweep
shows where the numeric verdict turns from diverges to undecided to converges.

    python3 scripts/log_power_sweep.py [--lo 0.1 --hi 0.7 --steps 25]
"""

import argparse
import math

import numpy as np

from serieslab.expr import SeriesSpec
from serieslab.second import second_raabe_test
from serieslab.sequences import DEFAULT_SCHEDULE

LN2 = math.log(2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=float, default=0.1)
    ap.add_argument("--hi", type=float, default=0.7)
    ap.add_argument("--steps", type=int, default=25)
    ap.add_argument("--lambda", dest="lam", type=float, nargs="+", default=[0.5, 1.0, 3.0])
    args = ap.parse_args()
    print(f"threshold ln2/2 = {LN2 / 2:.6f}")
    print(f"{'beta':>7s} {'truth':>9s} " + " ".join(f"{'lam=' + str(l):>22s}" for l in args.lam))
    wrong = 0
    for beta in map(float, np.linspace(args.lo, args.hi, args.steps)):
        spec = SeriesSpec.from_source(f"1/(n*ln(n)^({2 * beta / LN2!r}))", 2)
        truth = "converges" if beta > LN2 / 2 else "diverges"
        cells = []
        for lam in args.lam:
            res = second_raabe_test(spec, DEFAULT_SCHEDULE, lam)
            sr = res.evidence["second_raabe"]
            cells.append(f"{res.variant[:4]} m={sr['m']:.4f}")
            wrong += res.decisive and res.variant != truth
        print(f"{beta:7.4f} {truth:>9s} " + " ".join(f"{c:>22s}" for c in cells))
    print(f"\nwrong decisive verdicts: {wrong}")
    return 1 if wrong else 0


if __name__ == "__main__":
    raise SystemExit(main())
