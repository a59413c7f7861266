"""Ratio functionals shared by every test: classical ratio, second ratios,
condensed terms, sampled monotonicity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .expr import LN2, DomainError, SeriesSpec, TermValue

_NORMAL_MIN, _NORMAL_MAX = 1e-300, 1e300


@dataclass(frozen=True)
class RatioSample:
    n: int
    value: float
    log_value: float  # log of the ratio, from the structural log-difference

    def __post_init__(self):
        # 0.0 is an underflowed positive ratio; log_value still carries it
        if not self.value >= 0 or math.isnan(self.log_value):
            raise DomainError("invalid ratio", self.n)


@dataclass(frozen=True)
class IndexSchedule:
    """Geometric sampling indices ``ceil(n0 * growth**k)``, duplicates dropped.

    ``count`` is the number of distinct indices; the last ``window`` of them
    stand in for "sufficiently large n".
    """

    n0: int = 64
    growth: float = 1.5
    count: int = 64
    window: int = 12

    def __post_init__(self):
        if self.n0 < 1:
            raise ValueError("n0 must be a positive integer")
        if not self.growth > 1:
            raise ValueError("growth must exceed 1")
        if self.count < 1:
            raise ValueError("count must be positive")
        if not 4 <= self.window <= self.count:
            raise ValueError("window must satisfy 4 <= window <= count")

    @cached_property
    def indices(self) -> tuple[int, ...]:
        out: list[int] = []
        k = 0
        while len(out) < self.count:
            nk = math.ceil(self.n0 * self.growth**k)
            if not out or nk > out[-1]:
                out.append(nk)
            k += 1
        return tuple(out)

    @property
    def tail(self) -> tuple[int, ...]:
        return self.indices[-self.window :]

    def to_json(self) -> dict:
        return {"n0": self.n0, "growth": self.growth, "samples": self.count, "window": self.window}


DEFAULT_SCHEDULE = IndexSchedule()


def _ratio(seq, n: int, m: int) -> RatioSample:
    dlg = seq.log_ratio(n, m)
    try:
        return RatioSample(n, math.exp(dlg), dlg)
    except OverflowError:
        return RatioSample(n, math.inf, dlg)


def classical_ratio(seq, n: int) -> RatioSample:
    """``a(n+1)/a(n)``."""
    return _ratio(seq, n, n + 1)


def second_ratios(seq, n: int) -> tuple[RatioSample, RatioSample]:
    """``(a(2n)/a(n), a(2n+1)/a(n))``."""
    return _ratio(seq, n, 2 * n), _ratio(seq, n, 2 * n + 1)


def half_minus_ratio(log_ratio: float) -> float:
    """``1/2 - exp(log_ratio)`` without cancellation when the ratio is near 1/2."""
    return _half_minus(log_ratio + LN2)


def _half_minus(x: float) -> float:
    # 1/2 - exp(x)/2; + 0.0 turns -0.0 into 0.0
    try:
        return -0.5 * math.expm1(x) + 0.0
    except OverflowError:
        return -math.inf


def half_minus_second_ratio(seq, n: int, m: int) -> float:
    """``1/2 - a(m)/a(n)``, cancelling the ln 2 of the doubling exactly when
    the sequence exposes ``log_ratio_parts``."""
    parts = getattr(seq, "log_ratio_parts", None)
    if parts is None:
        return half_minus_ratio(seq.log_ratio(n, m))
    k, r = parts(n, m)
    return _half_minus((k + 1) * LN2 + r)


def condensed_term(spec: SeriesSpec, k: int) -> float:
    """``2**k * a(2**k)``; returns ``inf``/``0.0`` outside the float range."""
    if 2**k < spec.first_index:
        raise ValueError(f"2**{k} precedes first_index={spec.first_index}")
    return _condense(spec.term(2**k), k).value


def _condense(t: TermValue, k: int) -> TermValue:
    lg = k * LN2 + t.log
    # scaling by 2**k is exact while the direct value stays normal
    if _NORMAL_MIN <= t.value <= _NORMAL_MAX:
        v = math.ldexp(t.value, k)
        if _NORMAL_MIN <= v <= _NORMAL_MAX:
            return TermValue(v, lg)
    try:
        return TermValue(math.exp(lg), lg)
    except OverflowError:
        return TermValue(math.inf, lg)


@dataclass(frozen=True)
class CondensedSequence:
    """The Cauchy-condensed sequence ``b(k) = 2**k a(2**k)``.

    Quacks like a :class:`SeriesSpec` (``term``, ``log_ratio``,
    ``first_index``) so every ratio-based test runs on it unchanged.
    """

    base: SeriesSpec

    @property
    def first_index(self) -> int:
        return max(1, math.ceil(math.log2(self.base.first_index)))

    @property
    def source_text(self) -> str:
        return f"2^k*a(2^k) for a(n) = {self.base.source_text}"

    def term(self, k: int) -> TermValue:
        return _condense(self.base.term(2**k), k)

    def log_ratio(self, k: int, j: int) -> float:
        return (j - k) * LN2 + self.base.log_ratio(2**k, 2**j)

    def log_ratio_parts(self, k: int, j: int) -> tuple[float, float]:
        bk, br = self.base.log_ratio_parts(2**k, 2**j)
        return bk + (j - k), br


# exponents stay below 1023 so 2**k converts to a finite float
CONDENSED_SCHEDULE = IndexSchedule(n0=8, growth=1.075, count=64, window=12)


@dataclass(frozen=True)
class MonotoneResult:
    status: str  # "monotone_decreasing" | "not_monotone"
    witness: tuple | None = None
    sampled: bool = True

    @property
    def ok(self) -> bool:
        return self.status == "monotone_decreasing"

    def to_json(self) -> dict:
        out = {"status": self.status, "sampled": self.sampled}
        if self.witness is not None:
            out["witness"] = list(self.witness)
        return out


def monotone_check(spec, indices) -> MonotoneResult:
    """Refute ``a(n+1) <= a(n)`` on the given indices, plus the first few
    consecutive pairs from ``first_index``.

    A positive answer only means no counterexample was sampled.
    """
    start = spec.first_index
    probe = sorted(set(range(start, start + 8)) | {n for n in indices if n >= start})
    for n in probe:
        dlg = spec.log_ratio(n, n + 1)
        if dlg > 0:
            a_n = spec.term(n)
            a_next = spec.term(n + 1)
            return MonotoneResult("not_monotone", (n, a_n.value, n + 1, a_next.value))
    return MonotoneResult("monotone_decreasing")
