"""Test registry, per-series reports, and the corpus-wide battery."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

from . import __version__
from .classical import condensation_test, gauss_test, kummer_test, raabe_test, ratio_test
from .corpus import CorpusEntry
from .expr import DomainError
from .second import (
    divergence_ratio_check,
    second_gauss_test,
    second_kummer_test,
    second_raabe_limit_form,
    second_raabe_test,
    second_ratio_test,
    strict_second_ratio,
)
from .sequences import DEFAULT_SCHEDULE, IndexSchedule
from .verdict import CONVERGES, DIVERGES, INAPPLICABLE, INCONCLUSIVE, UNDECIDED, Verdict

ALL = frozenset({CONVERGES, DIVERGES, INCONCLUSIVE, UNDECIDED})
NO_INCONCLUSIVE = frozenset({CONVERGES, DIVERGES, UNDECIDED})


@dataclass(frozen=True)
class RunConfig:
    schedule: IndexSchedule = DEFAULT_SCHEDULE
    lambda_scale: float = 1.0
    p_exp: float = 2.0
    gauss_lambda: float = 1.0
    aux: str | None = None  # None: each Kummer-type test uses its own default
    condensation_inner: str = "raabe"

    def to_json(self) -> dict:
        return {
            "lambda": self.lambda_scale,
            "p_exp": self.p_exp,
            "gauss_lambda": self.gauss_lambda,
            "aux": self.aux,
            "condensation_inner": self.condensation_inner,
        }


@dataclass(frozen=True)
class TestEntry:
    name: str
    run: Callable[[object, RunConfig], Verdict]
    emits: frozenset  # verdicts reachable on positive input, besides inapplicable
    gated: bool = False  # has a monotonicity precondition


def _kw(**extra):
    return {k: v for k, v in extra.items() if v is not None}


REGISTRY: dict[str, TestEntry] = {
    t.name: t
    for t in [
        TestEntry("ratio", lambda s, c: ratio_test(s, c.schedule), ALL),
        TestEntry("raabe", lambda s, c: raabe_test(s, c.schedule), ALL),
        TestEntry("gauss", lambda s, c: gauss_test(s, c.schedule, c.gauss_lambda), NO_INCONCLUSIVE),
        TestEntry("kummer", lambda s, c: kummer_test(s, c.schedule, **_kw(aux=c.aux)), NO_INCONCLUSIVE),
        TestEntry(
            "condensation",
            lambda s, c: condensation_test(s, c.schedule, inner=c.condensation_inner),
            ALL,
            gated=True,
        ),
        TestEntry("second_ratio", lambda s, c: second_ratio_test(s, c.schedule), ALL),
        TestEntry("second_raabe", lambda s, c: second_raabe_test(s, c.schedule, c.lambda_scale), ALL),
        TestEntry(
            "second_raabe_limit",
            lambda s, c: second_raabe_limit_form(s, c.schedule, c.lambda_scale),
            NO_INCONCLUSIVE,
        ),
        TestEntry(
            "second_gauss", lambda s, c: second_gauss_test(s, c.schedule, c.p_exp), NO_INCONCLUSIVE, gated=True
        ),
        TestEntry(
            "second_kummer", lambda s, c: second_kummer_test(s, c.schedule, **_kw(aux=c.aux)), NO_INCONCLUSIVE
        ),
        TestEntry("strict_second_ratio", lambda s, c: strict_second_ratio(s, c.schedule), frozenset({CONVERGES, UNDECIDED})),
        TestEntry("divergence_ratio", lambda s, c: divergence_ratio_check(s, c.schedule), frozenset({DIVERGES, UNDECIDED})),
    ]
}

TEST_NAMES = tuple(REGISTRY)


def parse_test_list(text: str | None) -> tuple[str, ...]:
    if text is None or text.strip() == "all":
        return TEST_NAMES
    names = tuple(t.strip() for t in text.split(","))
    if not all(names):
        raise ValueError(f"empty name in test list {text!r}")
    unknown = [n for n in names if n not in REGISTRY]
    if unknown or not names:
        raise ValueError(f"unknown test(s) {unknown}; choose from {', '.join(TEST_NAMES)} or 'all'")
    return names


@dataclass
class TestReport:
    name: str
    verdict: Verdict
    millis: float | None = None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "verdict": self.verdict.variant,
            "evidence": self.verdict.evidence,
            "notes": list(self.verdict.notes),
            "millis": self.millis,
        }


def run_test(name: str, spec, config: RunConfig, timing: bool = False) -> TestReport:
    """Run one registered test. A failure to evaluate a functional deep in the
    tail is a numeric limitation, reported as undecided."""
    t0 = time.perf_counter()
    try:
        verdict = REGISTRY[name].run(spec, config)
    except DomainError as exc:
        verdict = Verdict(UNDECIDED, {"evaluation_error": str(exc)}, ["functional could not be evaluated"])
    millis = round((time.perf_counter() - t0) * 1000, 3) if timing else None
    return TestReport(name, verdict, millis)


class VerdictConflict(RuntimeError):
    """Two tests reached opposite decisive verdicts on the same series."""

    def __init__(self, converging: list[str], diverging: list[str]):
        self.converging = converging
        self.diverging = diverging
        super().__init__(f"conflict: converges by {converging}, diverges by {diverging}")


PRECEDENCE = (CONVERGES, DIVERGES, INCONCLUSIVE, UNDECIDED, INAPPLICABLE)


def overall_verdict(reports: list[TestReport]) -> tuple[str, list[str]]:
    """Decisive beats inconclusive beats undecided beats inapplicable.

    Raises :class:`VerdictConflict` when both decisive verdicts occur.
    """
    by_variant: dict[str, list[str]] = {v: [] for v in PRECEDENCE}
    for r in reports:
        by_variant[r.verdict.variant].append(r.name)
    if by_variant[CONVERGES] and by_variant[DIVERGES]:
        raise VerdictConflict(by_variant[CONVERGES], by_variant[DIVERGES])
    for v in PRECEDENCE:
        if by_variant[v]:
            return v, by_variant[v]
    return UNDECIDED, []


@dataclass
class BatteryReport:
    """Every selected test on one series."""

    term: str
    first_index: int
    schedule: IndexSchedule
    config: RunConfig
    tests: list[TestReport]
    version: str = __version__

    @property
    def overall(self) -> tuple[str, list[str]]:
        return overall_verdict(self.tests)

    def to_json(self) -> dict:
        verdict, decided_by = self.overall
        return {
            "version": self.version,
            "input": {"term": self.term, "first_index": self.first_index},
            "schedule": self.schedule.to_json(),
            "parameters": self.config.to_json(),
            "tests": [t.to_json() for t in self.tests],
            "overall": {"verdict": verdict, "decided_by": decided_by},
        }


def classify_series(spec, names=TEST_NAMES, config: RunConfig = RunConfig(), timing=False) -> BatteryReport:
    reports = [run_test(n, spec, config, timing) for n in names]
    return BatteryReport(spec.source_text, spec.first_index, config.schedule, config, reports)


# --------------------------------------------------------------------------
# corpus battery


@dataclass
class Violation:
    entry_id: str
    test: str
    verdict: str
    truth: str

    def to_json(self) -> dict:
        return {"entry": self.entry_id, "test": self.test, "verdict": self.verdict, "truth": self.truth}


@dataclass
class CorpusRow:
    entry: CorpusEntry
    reports: list[TestReport]

    def to_json(self) -> dict:
        return {**self.entry.to_json(), "tests": [r.to_json() for r in self.reports]}


@dataclass
class CorpusReport:
    config: RunConfig
    names: tuple[str, ...]
    rows: list[CorpusRow] = field(default_factory=list)
    version: str = __version__

    @property
    def violations(self) -> list[Violation]:
        out = []
        for row in self.rows:
            for r in row.reports:
                v = r.verdict.variant
                if v in (CONVERGES, DIVERGES) and v != row.entry.truth:
                    out.append(Violation(row.entry.id, r.name, v, row.entry.truth))
        return out

    def coverage(self) -> dict[str, dict[str, int]]:
        """Counts of each verdict per test across the corpus."""
        matrix = {n: {v: 0 for v in PRECEDENCE} for n in self.names}
        for row in self.rows:
            for r in row.reports:
                matrix[r.name][r.verdict.variant] += 1
        return matrix

    def missing_coverage(self) -> dict[str, list[str]]:
        """Per test, the verdicts it can emit that no corpus entry produced."""
        cov = self.coverage()
        out = {}
        for n in self.names:
            missing = sorted(v for v in REGISTRY[n].emits if cov[n][v] == 0)
            if missing:
                out[n] = missing
        return out

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "schedule": self.config.schedule.to_json(),
            "parameters": self.config.to_json(),
            "tests": list(self.names),
            "entries": [row.to_json() for row in self.rows],
            "coverage": self.coverage(),
            "soundness": {
                "violations": [v.to_json() for v in self.violations],
                "count": len(self.violations),
            },
        }


def run_battery(
    corpus: list[CorpusEntry], names=TEST_NAMES, config: RunConfig = RunConfig(), timing=False
) -> CorpusReport:
    report = CorpusReport(config, tuple(names))
    for entry in sorted(corpus, key=lambda e: e.id):
        report.rows.append(CorpusRow(entry, [run_test(n, entry.spec, config, timing) for n in names]))
    return report


def json_safe(obj):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if hasattr(obj, "to_json"):
        return json_safe(obj.to_json())
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if hasattr(obj, "item"):  # numpy scalars
        return json_safe(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")
