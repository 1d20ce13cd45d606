"""Exact continuous-time Boolean semantics on piecewise-linear traces.

Truth sets are computed over [0, ∞) with the trace held constant after its horizon, then clipped to
[0, T] for reporting. Until follows σᵗ ⊨ ψ₁ U_I ψ₂ iff some t' ∈ I has σ^{t+t'} ⊨ ψ₂ and ψ₁ holds
on [t, t + t'), the half-open convention.
"""

import math

import numpy as np

from formula.ast import (
    And,
    Always,
    Atom,
    Eventually,
    FalseFormula,
    Formula,
    Interval,
    LinearPredicate,
    Not,
    Or,
    Release,
    TrueFormula,
    Until,
)
from monitor.intervals import TimeInterval, TruthIntervalSet
from signals.trace import PwlTrace
from utilities.exceptions import FormulaValidationError


def window_bounds(interval: Interval) -> tuple[float, float]:
    if not interval.is_numeric:
        raise FormulaValidationError(f"window {interval.to_text()} has unresolved timing parameters")
    return float(interval.lo), float(interval.hi)


def atom_truth_set(trace: PwlTrace, predicate: LinearPredicate, tolerance: float = 0.0) -> TruthIntervalSet:
    """{t ≥ 0 : π_p(σ(t)) ≥ −tolerance}, solved segment by segment."""
    margins = trace.margins(predicate) + tolerance
    times = trace.times
    pieces = []
    for k in range(len(times) - 1):
        t0, t1, m0, m1 = times[k], times[k + 1], margins[k], margins[k + 1]
        if m0 >= 0 and m1 >= 0:
            pieces.append(TimeInterval.closed(t0, t1))
        elif m0 >= 0 or m1 >= 0:
            root = t0 + (t1 - t0) * m0 / (m0 - m1)
            pieces.append(TimeInterval.closed(t0, root) if m0 >= 0 else TimeInterval.closed(root, t1))
    if margins[-1] >= 0:
        pieces.append(TimeInterval(float(times[-1]), True, math.inf, False))
    return TruthIntervalSet(pieces)


def eventually_set(child: TruthIntervalSet, a: float, b: float) -> TruthIntervalSet:
    return child.shifted_back(a, b).clip(0.0, math.inf)


def always_set(child: TruthIntervalSet, a: float, b: float) -> TruthIntervalSet:
    return eventually_set(child.complement(), a, b).complement()


def until_set(left: TruthIntervalSet, right: TruthIntervalSet, a: float, b: float) -> TruthIntervalSet:
    """Component-wise until: J ∩ ((K ∩ (−∞, sup J]) ⊖ [a, b]) over components J of ψ₁, K of ψ₂."""
    pieces = list(right.intervals) if a == 0 else []
    for hold in left.intervals:
        reach = TimeInterval(-math.inf, False, hold.hi, True)
        for witness in right.intervals:
            if witness.lo > hold.hi:
                break
            target = witness.intersect(reach)
            if target.is_empty:
                continue
            pieces.append(hold.intersect(target.shifted_back(a, b)))
    return TruthIntervalSet(pieces).clip(0.0, math.inf)


def release_set(left: TruthIntervalSet, right: TruthIntervalSet, a: float, b: float) -> TruthIntervalSet:
    return until_set(left.complement(), right.complement(), a, b).complement()


class BooleanMonitor:
    """Evaluates truth sets bottom-up, memoized per subformula."""

    def __init__(self, trace: PwlTrace, tolerance: float = 0.0):
        self.trace = trace
        self.tolerance = tolerance
        self._cache: dict[Formula, TruthIntervalSet] = {}

    def evaluate(self, phi: Formula) -> TruthIntervalSet:
        """Truth set over [0, ∞)."""
        cached = self._cache.get(phi)
        if cached is None:
            cached = self._evaluate(phi)
            self._cache[phi] = cached
        return cached

    def _evaluate(self, phi: Formula) -> TruthIntervalSet:
        match phi:
            case Atom(predicate):
                return atom_truth_set(self.trace, predicate, self.tolerance)
            case TrueFormula():
                return TruthIntervalSet.nonnegative()
            case FalseFormula():
                return TruthIntervalSet.empty()
            case Not(child):
                return self.evaluate(child).complement()
            case And(operands):
                result = self.evaluate(operands[0])
                for op in operands[1:]:
                    result = result.intersection(self.evaluate(op))
                return result
            case Or(operands):
                result = self.evaluate(operands[0])
                for op in operands[1:]:
                    result = result.union(self.evaluate(op))
                return result
            case Eventually(interval, child):
                return eventually_set(self.evaluate(child), *window_bounds(interval))
            case Always(interval, child):
                return always_set(self.evaluate(child), *window_bounds(interval))
            case Until(interval, left, right):
                return until_set(self.evaluate(left), self.evaluate(right), *window_bounds(interval))
            case Release(interval, left, right):
                return release_set(self.evaluate(left), self.evaluate(right), *window_bounds(interval))
        raise FormulaValidationError(f"unsupported formula node {type(phi).__name__}")

    def truth_intervals(self, phi: Formula) -> TruthIntervalSet:
        return self.evaluate(phi).clip(0.0, self.trace.horizon)


def truth_intervals(trace: PwlTrace, phi: Formula, tolerance: float = 0.0) -> TruthIntervalSet:
    """{t ∈ [0, T] : σᵗ ⊨ φ}. A positive tolerance relaxes every atom to c⊤x + b ≥ −tolerance."""
    return BooleanMonitor(trace, tolerance).truth_intervals(phi)


def sat(trace: PwlTrace, phi: Formula, tolerance: float = 0.0, at: float = 0.0) -> bool:
    return BooleanMonitor(trace, tolerance).evaluate(phi).contains(at)


def sample_truth(trace: PwlTrace, phi: Formula, ts: np.ndarray, tolerance: float = 0.0) -> np.ndarray:
    """Truth values at the given times, for comparisons against pointwise evaluation."""
    truth = BooleanMonitor(trace, tolerance).evaluate(phi)
    return np.array([truth.contains(float(t)) for t in ts], dtype=bool)
