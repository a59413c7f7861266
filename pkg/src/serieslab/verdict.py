"""Test outcomes and the evidence that produced them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

CONVERGES = "converges"
DIVERGES = "diverges"
INCONCLUSIVE = "inconclusive"
UNDECIDED = "undecided"
INAPPLICABLE = "inapplicable"

VARIANTS = (CONVERGES, DIVERGES, INCONCLUSIVE, UNDECIDED, INAPPLICABLE)
DECISIVE = (CONVERGES, DIVERGES)


@dataclass
class Verdict:
    """Outcome of one convergence test.

    ``inconclusive`` means the test's own mathematical no-verdict case was
    confirmed numerically; ``undecided`` means the numbers could not place the
    estimate; ``inapplicable`` means a precondition (positivity, monotonicity)
    failed and ``evidence`` names it.
    """

    variant: str
    evidence: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown verdict {self.variant!r}")

    @property
    def decisive(self) -> bool:
        return self.variant in DECISIVE

    def to_json(self) -> dict:
        return {"verdict": self.variant, "evidence": self.evidence, "notes": list(self.notes)}


def inapplicable(precondition: str, **details) -> Verdict:
    return Verdict(INAPPLICABLE, {"precondition": precondition, **details}, [f"{precondition} violated"])
