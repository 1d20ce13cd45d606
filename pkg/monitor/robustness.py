"""Robust (quantitative) semantics on piecewise-linear traces.

Every robustness signal of a PWL trace is itself piecewise linear, so each operator is computed
exactly on a refined knot grid. Bounded until / release go through their unbounded rewriting,
which preserves robustness.
"""

import math

from formula.ast import (
    And,
    Always,
    Atom,
    Eventually,
    FalseFormula,
    Formula,
    Not,
    Or,
    Release,
    TrueFormula,
    Until,
)
from formula.transforms import rewrite_bounded_ur
from monitor.boolean import window_bounds
from monitor.pwl_function import PwlFunction, until_unbounded, window_max, window_min
from signals.trace import PwlTrace
from utilities.exceptions import FormulaValidationError


class RobustnessMonitor:
    def __init__(self, trace: PwlTrace):
        self.trace = trace
        self._cache: dict[Formula, PwlFunction] = {}

    def signal(self, phi: Formula) -> PwlFunction:
        """t ↦ ⟦σᵗ, φ⟧ on [0, T], constant after T."""
        cached = self._cache.get(phi)
        if cached is None:
            cached = self._signal(phi)
            self._cache[phi] = cached
        return cached

    def _signal(self, phi: Formula) -> PwlFunction:
        horizon = self.trace.horizon
        match phi:
            case Atom(predicate):
                return PwlFunction(self.trace.times, self.trace.margins(predicate))
            case TrueFormula():
                return PwlFunction.constant(math.inf, horizon)
            case FalseFormula():
                return PwlFunction.constant(-math.inf, horizon)
            case Not(child):
                return -self.signal(child)
            case And(operands):
                result = self.signal(operands[0])
                for op in operands[1:]:
                    result = result.minimum(self.signal(op))
                return result
            case Or(operands):
                result = self.signal(operands[0])
                for op in operands[1:]:
                    result = result.maximum(self.signal(op))
                return result
            case Eventually(interval, child):
                return window_max(self.signal(child), *window_bounds(interval))
            case Always(interval, child):
                return window_min(self.signal(child), *window_bounds(interval))
            case Until(interval, left, right):
                if not interval.is_unbounded:
                    return self.signal(rewrite_bounded_ur(phi))
                return until_unbounded(self.signal(left), self.signal(right))
            case Release(interval, left, right):
                if not interval.is_unbounded:
                    return self.signal(rewrite_bounded_ur(phi))
                return -until_unbounded(-self.signal(left), -self.signal(right))
        raise FormulaValidationError(f"unsupported formula node {type(phi).__name__}")


def robustness(trace: PwlTrace, phi: Formula, at: float = 0.0) -> float:
    """⟦σ^at, φ⟧, in the extended reals."""
    return RobustnessMonitor(trace).signal(phi).value_at(at)
