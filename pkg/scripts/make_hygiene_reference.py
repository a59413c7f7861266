"""Write the 50-digit reference values for ln(lambda n) (1/2 - a(2n)/a(n)).

Each family's term is written out by hand for mpmath rather than going
through the package's parser and evaluator, so the reference is independent
of the code under test. All sampled pairs have |a(2n)/a(n) - 1/2| <= 1e-6.

    python scripts/make_hygiene_reference.py [--out tests/data/hygiene_reference.json]
"""

import argparse
import json
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50

FAMILIES = {
    "1/n^1.000001": lambda n: 1 / n ** mp.mpf("1.000001"),
    "1/n^1.0000001": lambda n: 1 / n ** mp.mpf("1.0000001"),
    "1/(n*ln(n)^0.00001)": lambda n: 1 / (n * mp.log(n) ** mp.mpf("0.00001")),
    "(1+1/n)/n": lambda n: (1 + 1 / n) / n,
    "1/(n^1.0000001*ln(n)^0.000001)": lambda n: 1 / (n ** mp.mpf("1.0000001") * mp.log(n) ** mp.mpf("0.000001")),
    "exp(-1/n)/n": lambda n: mp.exp(-1 / n) / n,
}

PAIRS = [
    ("1/n^1.000001", 10, 1),
    ("1/n^1.000001", 10**3, 1),
    ("1/n^1.000001", 10**6, 1),
    ("1/n^1.000001", 10**9, 0.5),
    ("1/n^1.000001", 10**12, 3),
    ("1/n^1.0000001", 10**4, 3),
    ("1/n^1.0000001", 10**10, 1),
    ("1/(n*ln(n)^0.00001)", 100, 1),
    ("1/(n*ln(n)^0.00001)", 10**4, 0.5),
    ("1/(n*ln(n)^0.00001)", 10**8, 1),
    ("1/(n*ln(n)^0.00001)", 10**12, 3),
    ("(1+1/n)/n", 10**6, 1),
    ("(1+1/n)/n", 10**8, 0.5),
    ("(1+1/n)/n", 10**10, 1),
    ("(1+1/n)/n", 10**12, 3),
    ("1/(n^1.0000001*ln(n)^0.000001)", 10**3, 1),
    ("1/(n^1.0000001*ln(n)^0.000001)", 10**9, 3),
    ("exp(-1/n)/n", 10**6, 1),
    ("exp(-1/n)/n", 10**9, 0.5),
    ("exp(-1/n)/n", 10**12, 1),
]


def reference(source: str, n: int, lam) -> tuple[mp.mpf, mp.mpf]:
    a = FAMILIES[source]
    N = mp.mpf(n)
    ratio = a(2 * N) / a(N)
    return mp.log(mp.mpf(lam) * N) * (mp.mpf(1) / 2 - ratio), ratio


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "tests" / "data" / "hygiene_reference.json"
    parser.add_argument("--out", type=Path, default=default)
    args = parser.parse_args()
    rows = []
    for source, n, lam in PAIRS:
        value, ratio = reference(source, n, lam)
        gap = abs(ratio - mp.mpf(1) / 2)
        assert gap <= mp.mpf("1e-6"), (source, n, gap)
        rows.append(
            {
                "term": source,
                "n": n,
                "lambda": lam,
                "reference": mp.nstr(value, 30),
                "ratio_minus_half": mp.nstr(ratio - mp.mpf(1) / 2, 10),
            }
        )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps({"digits": 50, "pairs": rows}, indent=2) + "\n")
    print(f"wrote {len(rows)} reference values to {args.out}")


if __name__ == "__main__":
    main()
