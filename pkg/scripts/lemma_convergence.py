"""Raw and extrapolated errors of the log-p functionals against p*ln2/2.

For every (p, lambda, eq) on the acceptance grid, prints the worst raw window
error, the extrapolated error, and the first-order bias prediction
``|p ln2/2 * ln(lambda)/ln n - p(p+1)(ln 2)^2/(4 ln n)|`` at the window's
smallest index. The prediction shows how deep a schedule would have to reach
before the raw estimate meets a given tolerance.

    python3 scripts/lemma_convergence.py [--tol 0.06]
"""

import argparse
import math

from serieslab.limits import estimate_limits
from serieslab.second import lemma_functional
from serieslab.sequences import IndexSchedule

LN2 = math.log(2)


def first_order_bias(p, lam, n):
    ln_n = math.log(n)
    return abs(p * LN2 / 2 * math.log(lam) / ln_n - p * (p + 1) * LN2**2 / (4 * ln_n))


def depth_needed(p, lam, tol):
    """Smallest ln n at which the first-order bias drops below tol."""
    ln_n = 2.0
    while first_order_bias(p, lam, math.exp(ln_n)) > tol and ln_n < 700:
        ln_n += 0.1
    return ln_n


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tol", type=float, default=0.06, help="raw tolerance to report depth for")
    ap.add_argument("--samples", type=int, default=64)
    args = ap.parse_args()
    sched = IndexSchedule(count=args.samples)
    n_lo = sched.tail[0]
    print(f"window {sched.tail[0]:.3g} .. {sched.tail[-1]:.3g}")
    print(f"{'p':>5s} {'lam':>4s} {'eq':>4s} {'raw err':>9s} {'extrap err':>11s} {'bias pred':>10s} {'ln n needed':>12s}")
    for p in (-1.0, 0.5, 1.0, 2.0, 3.0):
        for lam in (0.5, 1.0, 3.0):
            for which in ("eq1", "eq2"):
                t = p * LN2 / 2
                f = lambda n: lemma_functional(p, lam, which, n)
                raw = estimate_limits(f, sched, False, lam)
                ex = estimate_limits(f, sched, True, lam)
                e_raw = max(abs(raw.liminf_hat - t), abs(raw.limsup_hat - t))
                e_ex = max(abs(ex.liminf_hat - t), abs(ex.limsup_hat - t))
                flag = " *" if e_raw > args.tol else ""
                print(
                    f"{p:5.1f} {lam:4.1f} {which:>4s} {e_raw:9.4f} {e_ex:11.2e} "
                    f"{first_order_bias(p, lam, n_lo):10.4f} {depth_needed(p, lam, args.tol):12.1f}{flag}"
                )
    print(f"\n* raw error above {args.tol}")


if __name__ == "__main__":
    main()
