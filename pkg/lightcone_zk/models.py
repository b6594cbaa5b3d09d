"""
models.py — Shared record types.

Defines:
  • RejectReason enum for the verifier's enumerated reject causes
  • Verdict dataclass returned by every accept/reject decision
  • CheckReport dataclass emitted by every numerical theorem check
  • SweepSummary aggregating a batch of CheckReports
"""

from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Dict, Iterable, Optional, Tuple


class RejectReason(Enum):
    """Why a verifier rejected a transcript."""
    ALGEBRA_0        = auto()
    ALGEBRA_1        = auto()
    BAD_PERMUTATION  = auto()
    BAD_CYCLE        = auto()
    TIMING           = auto()

    @property
    def display(self) -> str:
        """Wire name used in transcripts and reports."""
        _labels = {
            RejectReason.ALGEBRA_0:       "algebra-0",
            RejectReason.ALGEBRA_1:       "algebra-1",
            RejectReason.BAD_PERMUTATION: "bad-permutation",
            RejectReason.BAD_CYCLE:       "bad-cycle",
            RejectReason.TIMING:          "timing",
        }
        return _labels[self]

    @classmethod
    def from_display(cls, label: str) -> "RejectReason":
        for reason in cls:
            if reason.display == label:
                return reason
        raise ValueError(f"Unknown reject reason: {label!r}")


@dataclass(frozen=True)
class Verdict:
    """Outcome of a verification; `entry` names the offending matrix cell if any."""
    accepted: bool
    reason: Optional[RejectReason] = None
    detail: str = ""
    entry: Optional[Tuple[int, int]] = None

    @classmethod
    def accept(cls) -> "Verdict":
        return cls(accepted=True)

    @classmethod
    def reject(
        cls, reason: RejectReason, detail: str = "", entry: Optional[Tuple[int, int]] = None
    ) -> "Verdict":
        return cls(accepted=False, reason=reason, detail=detail, entry=entry)

    def __bool__(self) -> bool:
        return self.accepted

    def to_dict(self) -> dict:
        return {
            "verdict": "accept" if self.accepted else "reject",
            "reason": self.reason.display if self.reason else None,
            "detail": self.detail,
        }


@dataclass
class CheckReport:
    """
    Result of one numerical inequality check.

    `margin` is (right side of the claimed inequality) minus (left side), so
    a non-negative margin, up to tolerance, means the inequality held.
    """
    theorem: str
    passed: bool
    margin: float
    dim: int = 0
    n: int = 0
    S: int = 1
    V: Optional[float] = None
    E: Optional[float] = None
    bound: Optional[float] = None
    extra: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        record = {
            "theorem": self.theorem,
            "dim": self.dim,
            "n": self.n,
            "S": self.S,
            "V": self.V,
            "E": self.E,
            "bound": self.bound,
            "margin": self.margin,
            "pass": self.passed,
        }
        record.update(self.extra)
        return record


@dataclass
class SweepSummary:
    """Pass/fail tallies over a batch of checks."""
    passed: int = 0
    failed: int = 0
    min_margin: float = float("inf")
    by_theorem: Dict[str, Dict[str, int]] = field(default_factory=dict)

    @classmethod
    def from_reports(cls, reports: Iterable[CheckReport]) -> "SweepSummary":
        summary = cls()
        for r in reports:
            summary.add(r)
        return summary

    def add(self, report: CheckReport) -> None:
        tally = self.by_theorem.setdefault(report.theorem, {"pass": 0, "fail": 0})
        if report.passed:
            self.passed += 1
            tally["pass"] += 1
        else:
            self.failed += 1
            tally["fail"] += 1
        self.min_margin = min(self.min_margin, report.margin)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "fail": self.failed,
            "min_margin": None if self.min_margin == float("inf") else self.min_margin,
            "by_theorem": self.by_theorem,
        }
