"""Checks of conservative valuations and δ-stable partitions against the exact monitor."""

from dataclasses import dataclass
from typing import Mapping, Sequence

from formula.ast import Formula, subformulas
from formula.transforms import delta_tighten
from monitor.boolean import BooleanMonitor
from signals.trace import PwlTrace


@dataclass(frozen=True)
class ValuationViolation:
    formula: Formula
    interval: int  # 1-based, Γᵢ = [γ_{i−1}, γᵢ]
    claimed: bool | None
    reason: str

    def to_text(self) -> str:
        return f"Θ({self.formula.to_text()}, {self.interval}) = {self.claimed}: {self.reason}"


def valuation_violations(
    trace: PwlTrace,
    phi: Formula,
    gamma: Sequence[float],
    theta: Mapping[Formula, Sequence[bool]],
    delta: float,
    tolerance: float = 0.0,
) -> list[ValuationViolation]:
    """Every (ψ, i) where Θ is not conservative.

    Θ(ψ, i) = ⊤ needs Γᵢ inside the truth set of ψ; Θ(ψ, i) = ⊥ needs Γᵢ disjoint from the truth set
    of ψ^δ. `theta[ψ][i - 1]` holds Θ(ψ, i). A positive tolerance relaxes atoms by that much in the ⊤
    check, tightens them by δ + tolerance in the ⊥ check, and ignores coverage gaps shorter than it.
    """
    relaxed = BooleanMonitor(trace, tolerance)
    tightened = BooleanMonitor(trace)
    violations = []
    for psi in subformulas(phi):
        values = theta.get(psi)
        if values is None or len(values) != len(gamma) - 1:
            violations.append(ValuationViolation(psi, 0, None, "valuation is missing or has the wrong length"))
            continue
        truth = relaxed.evaluate(psi)
        tight_truth = None
        for i, claimed in enumerate(values, start=1):
            lo, hi = gamma[i - 1], gamma[i]
            if claimed:
                if not truth.contains_interval(lo, hi, tolerance):
                    violations.append(ValuationViolation(psi, i, True, f"ψ is false somewhere in [{lo:g}, {hi:g}]"))
            else:
                if tight_truth is None:
                    tight_truth = tightened.evaluate(delta_tighten(psi, delta + tolerance))
                if tight_truth.intersects_interval(lo, hi, tolerance):
                    violations.append(
                        ValuationViolation(psi, i, False, f"ψ^δ holds somewhere in [{lo:g}, {hi:g}]")
                    )
    return violations


def check_conservative_valuation(
    trace: PwlTrace,
    phi: Formula,
    gamma: Sequence[float],
    theta: Mapping[Formula, Sequence[bool]],
    delta: float,
    tolerance: float = 0.0,
) -> bool:
    return not valuation_violations(trace, phi, gamma, theta, delta, tolerance)


def is_delta_stable(trace: PwlTrace, phi: Formula, gamma: Sequence[float], delta: float) -> bool:
    """Each Γᵢ lies inside ψ's truth set or misses ψ^δ's truth set, for every subformula ψ."""
    monitor = BooleanMonitor(trace)
    for psi in subformulas(phi):
        truth = monitor.evaluate(psi)
        tight_truth = monitor.evaluate(delta_tighten(psi, delta))
        for lo, hi in zip(gamma[:-1], gamma[1:], strict=True):
            if not truth.contains_interval(lo, hi) and tight_truth.intersects_interval(lo, hi):
                return False
    return True
