"""Reference series with analytic convergence labels, and a partial-sum oracle
that cross-checks (never assigns) those labels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .expr import DomainError, SeriesSpec

CONVERGES = "converges"
DIVERGES = "diverges"


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    spec: SeriesSpec
    truth: str
    truth_reason: str
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.truth not in (CONVERGES, DIVERGES):
            raise ValueError(f"truth must be converges or diverges, not {self.truth!r}")

    @property
    def slow(self) -> bool:
        return "slow" in self.tags

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "source_text": self.spec.source_text,
            "first_index": self.spec.first_index,
            "truth": self.truth,
            "reason": self.truth_reason,
            "tags": list(self.tags),
        }


def _entry(id, source, truth, reason, tags=(), first_index=None) -> CorpusEntry:
    return CorpusEntry(id, SeriesSpec.from_source(source, first_index), truth, reason, tuple(tags))


def builtin_corpus() -> list[CorpusEntry]:
    """The built-in corpus, sorted by id."""
    entries = [
        _entry("geometric-0.5", "(1/2)^n", CONVERGES, "geometric, r=0.5 < 1"),
        _entry("geometric-0.9", "0.9^n", CONVERGES, "geometric, r=0.9 < 1"),
        _entry("geometric-1.1", "1.1^n", DIVERGES, "geometric, r=1.1 > 1; terms do not vanish"),
        _entry("p-series-0.5", "1/sqrt(n)", DIVERGES, "p-series, p=0.5 <= 1", ["slow"]),
        _entry("harmonic", "1/n", DIVERGES, "p-series, p=1 (harmonic)", ["slow"]),
        _entry("p-series-1.01", "1/n^1.01", CONVERGES, "p-series, p=1.01 > 1", ["slow"]),
        _entry("p-series-2", "1/n^2", CONVERGES, "p-series, p=2 > 1"),
        _entry("p-series-3", "1/n^3", CONVERGES, "p-series, p=3 > 1"),
        _entry("log-p-0.5", "1/(n*ln(n)^0.5)", DIVERGES, "1/(n (ln n)^p) diverges for p=0.5 <= 1", ["slow"], 2),
        _entry("log-p-1", "1/(n*ln(n))", DIVERGES, "1/(n (ln n)^p) diverges for p=1", ["slow"], 2),
        _entry("log-p-2", "1/(n*ln(n)^2)", CONVERGES, "1/(n (ln n)^p) converges for p=2 > 1", ["slow"], 2),
        _entry("log-p-3", "1/(n*ln(n)^3)", CONVERGES, "1/(n (ln n)^p) converges for p=3 > 1", ["slow"], 2),
        _entry("n-over-n-plus-1", "n/(n+1)", DIVERGES, "terms tend to 1, not 0"),
        _entry("linear", "n", DIVERGES, "terms grow without bound"),
        _entry("cubic-geometric", "2^(-n)*n^3", CONVERGES, "root test: (n^3)^(1/n)/2 -> 1/2 < 1"),
        _entry(
            "log-log",
            "1/(n*ln(n)*ln(ln(n)))",
            DIVERGES,
            "condensation reduces it to 1/(k ln k) up to constants, which diverges",
            ["slow"],
            3,
        ),
        _entry("log-over-square", "ln(n)/n^2", CONVERGES, "ln n/n^2 <= 1/n^1.5 eventually", first_index=2),
        _entry("stretched-exp", "exp(-sqrt(n))", CONVERGES, "exp(-sqrt n) <= 720/n^3 (from e^x >= x^6/6!)"),
        _entry(
            "oscillating-log-p-2",
            "(2+(-1)^n)/(n*ln(n)^2)",
            CONVERGES,
            "bounded by 3/(n (ln n)^2), which converges",
            ["slow"],
            2,
        ),
        _entry("exp-n-over-log", "exp(-n/ln(n))", CONVERGES, "n/ln n >= sqrt n, so terms <= exp(-sqrt n)", first_index=2),
        _entry(
            "shifted-log-p-1",
            "1/(n*(log2(n)-1))",
            DIVERGES,
            "1/(n (log2 n - 1)) >= 1/(n log2 n) = ln2/(n ln n), which diverges",
            ["slow"],
            3,
        ),
        _entry("inverse-log", "1/ln(n)", DIVERGES, "1/ln n >= 1/n", ["slow"], 2),
    ]
    return sorted(entries, key=lambda e: e.id)


def get_entry(entry_id: str, corpus: list[CorpusEntry] | None = None) -> CorpusEntry:
    for e in corpus or builtin_corpus():
        if e.id == entry_id:
            return e
    raise KeyError(entry_id)


# --------------------------------------------------------------------------
# partial-sum oracle


@dataclass
class PartialSum:
    value: float
    notes: list[str] = field(default_factory=list)


def partial_sum(spec: SeriesSpec, N: int) -> PartialSum:
    """``sum_{n=first_index}^{N} a(n)`` with compensated accumulation."""
    if N < spec.first_index:
        raise ValueError(f"N={N} precedes first_index={spec.first_index}")
    terms = []
    for n in range(spec.first_index, N + 1):
        try:
            terms.append(spec.term(n).value)
        except DomainError as exc:
            raise DomainError(f"term evaluation failed: {exc.message}", n) from None
    if any(math.isinf(t) for t in terms):
        return PartialSum(math.inf, ["a term overflowed; partial sum reported as +inf"])
    try:
        total = math.fsum(terms)
    except OverflowError:
        return PartialSum(math.inf, ["partial sum overflowed"])
    if math.isinf(total):
        return PartialSum(math.inf, ["partial sum overflowed"])
    return PartialSum(total)


@dataclass(frozen=True)
class PartialSumTrace:
    Ns: tuple[int, ...]
    sums: tuple[float, ...]

    @property
    def deltas(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.sums, self.sums[1:]))

    def to_json(self) -> dict:
        return {"N": list(self.Ns), "S": list(self.sums), "deltas": list(self.deltas)}


def partial_sum_trace(spec: SeriesSpec, N_max: int = 2**17, factor: int = 2) -> PartialSumTrace:
    """Partial sums at ``N = first_index * factor**k`` up to ``N_max``, computed
    incrementally so each term is evaluated once."""
    Ns = []
    N = max(spec.first_index, 2)
    while N <= N_max:
        Ns.append(N)
        N *= factor
    sums = []
    acc: list[float] = []
    n = spec.first_index
    for N in Ns:
        while n <= N:
            acc.append(spec.term(n).value)
            n += 1
        try:
            sums.append(math.fsum(acc))
        except OverflowError:
            sums.append(math.inf)
        acc = [sums[-1]] if math.isfinite(sums[-1]) else [math.inf]
    return PartialSumTrace(tuple(Ns), tuple(sums))


@dataclass(frozen=True)
class OracleResult:
    status: str  # "pass" | "suspicious"
    note: str = ""

    def to_json(self) -> dict:
        return {"status": self.status, "note": self.note}


def oracle_consistency(entry: CorpusEntry, trace: PartialSumTrace) -> OracleResult:
    """Cross-check a truth label against partial sums.

    Converges: successive deltas shrink and the last doubling changes S_N by
    less than 1e-3 relative. Diverges: the last doubling adds at least as much
    as the one before, which no convergent positive series keeps doing. Entries tagged ``slow`` are exempt, since partial sums cannot tell
    slow divergence from slow convergence.
    """
    if len(trace.Ns) < 4:
        raise ValueError("trace needs at least 4 values of N")
    if entry.slow:
        return OracleResult("pass", "tagged slow: exempt from the partial-sum check")
    s_prev, s_last = trace.sums[-2], trace.sums[-1]
    if entry.truth == CONVERGES:
        d = trace.deltas
        shrinking = all(b <= a for a, b in zip(d[-3:], d[-2:]))
        if not math.isfinite(s_last):
            return OracleResult("suspicious", "partial sums overflow for a convergent label")
        rel = abs(s_last - s_prev) / max(abs(s_last), 1e-300)
        if shrinking and rel < 1e-3:
            return OracleResult("pass")
        return OracleResult("suspicious", f"last doubling changed S_N by {rel:.3g} relative")
    if math.isinf(s_last):
        return OracleResult("pass")
    d_prev, d_last = trace.deltas[-2:]
    if d_last > 0 and d_last >= d_prev:
        return OracleResult("pass")
    return OracleResult("suspicious", "partial-sum increments shrink for a divergent label")
