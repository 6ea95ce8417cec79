"""Structured pass/fail results shared by the operator checks and the CLI."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one windowed operator check.

    residual is a max-norm (or a signed eigenvalue defect for semidefinite
    tests); window records the per-variable exact-column bound that was used,
    or None for checks with no truncation content.  A witness is present
    exactly when the check fails.
    """

    name: str
    verdict: bool
    residual: float
    tol: float
    window: tuple[int, ...] | None = None
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.verdict

    def as_record(self) -> dict:
        return {
            "name": self.name,
            "verdict": "pass" if self.verdict else "fail",
            "residual": self.residual,
            "tol": self.tol,
            "window": self.window,
            "witness": self.witness,
        }


def make_report(name: str, residual: float, tol: float,
                window: tuple[int, ...] | None = None,
                witness: str | None = None) -> VerificationReport:
    """Build a report enforcing the witness-iff-failing convention."""
    ok = residual <= tol
    return VerificationReport(name, ok, float(residual), float(tol), window,
                              None if ok else witness)
