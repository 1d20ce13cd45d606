import logging
import math
from typing import Mapping

from formula.ast import (
    And,
    Always,
    Atom,
    Eventually,
    FalseFormula,
    Formula,
    Interval,
    Not,
    Or,
    Param,
    Release,
    TrueFormula,
    Until,
    iter_nodes,
    map_children,
)
from utilities.exceptions import FormulaValidationError, ParameterDomainError

logger = logging.getLogger(__name__)


def to_nnf(phi: Formula) -> Formula:
    """Push negations down to atoms. A negated atom p becomes p⁻ : −c⊤x − b ≥ 0."""
    return _nnf(phi, negated=False)


def _nnf(phi: Formula, negated: bool) -> Formula:
    match phi:
        case Atom(predicate):
            return Atom(predicate.negated()) if negated else phi
        case TrueFormula():
            return FalseFormula() if negated else phi
        case FalseFormula():
            return TrueFormula() if negated else phi
        case Not(child):
            return _nnf(child, not negated)
        case And(operands):
            children = tuple(_nnf(op, negated) for op in operands)
            return Or(children) if negated else And(children)
        case Or(operands):
            children = tuple(_nnf(op, negated) for op in operands)
            return And(children) if negated else Or(children)
        case Eventually(interval, child):
            return (Always if negated else Eventually)(interval, _nnf(child, negated))
        case Always(interval, child):
            return (Eventually if negated else Always)(interval, _nnf(child, negated))
        case Until(interval, left, right):
            return (Release if negated else Until)(interval, _nnf(left, negated), _nnf(right, negated))
        case Release(interval, left, right):
            return (Until if negated else Release)(interval, _nnf(left, negated), _nnf(right, negated))
    raise FormulaValidationError(f"unsupported formula node {type(phi).__name__}")


def negate(phi: Formula) -> Formula:
    return to_nnf(Not(phi))


def rewrite_bounded_ur(phi: Formula) -> Formula:
    """Replace bounded until / release by unbounded ones guarded with bounded ◇ / □.

    ψ₁ U[a,b] ψ₂  becomes  ◇[a,b]ψ₂ ∧ □[0,a]ψ₁ ∧ □[0,a](ψ₁ U ψ₂)  (just ◇[0,b]ψ₂ ∧ (ψ₁ U ψ₂) when a = 0),
    ψ₁ R[a,b] ψ₂  becomes  □[a,b]ψ₂ ∨ ◇[0,a]ψ₁ ∨ ◇[0,a](ψ₁ R ψ₂)  (resp. □[0,b]ψ₂ ∨ (ψ₁ R ψ₂)).

    Both are exact when the truth set of ψ₁ is closed, which holds unless ψ₁ itself contains U or R.
    Otherwise the until form may additionally demand ψ₁ at a.
    """
    phi = map_children(phi, rewrite_bounded_ur)
    if not isinstance(phi, (Until, Release)) or phi.interval.is_unbounded:
        return phi

    interval = phi.interval
    if not interval.is_numeric:
        raise FormulaValidationError(f"instantiate timing parameters before rewriting {phi.to_text()}")
    if math.isinf(interval.hi):
        raise FormulaValidationError(f"window {interval.to_text()} is unbounded but does not start at 0")

    lo, hi = float(interval.lo), float(interval.hi)
    if isinstance(phi, Until):
        window = Eventually(Interval(lo, hi), phi.right)
        base = Until(Interval(), phi.left, phi.right)
        if lo == 0:
            return And((window, base))
        return And((window, Always(Interval(0.0, lo), phi.left), Always(Interval(0.0, lo), base)))

    window = Always(Interval(lo, hi), phi.right)
    base = Release(Interval(), phi.left, phi.right)
    if lo == 0:
        return Or((window, base))
    return Or((window, Eventually(Interval(0.0, lo), phi.left), Eventually(Interval(0.0, lo), base)))


def delta_tighten(phi: Formula, delta: float) -> Formula:
    """φ^δ: every atom c⊤x + b ≥ 0 becomes c⊤x + b ≥ δ. `phi` must be in NNF."""
    if delta <= 0:
        raise FormulaValidationError(f"delta must be positive, got {delta}")
    return _tighten(phi, delta)


def _tighten(phi: Formula, delta: float) -> Formula:
    if isinstance(phi, Atom):
        return Atom(phi.predicate.tightened(delta))
    if isinstance(phi, Not):
        raise FormulaValidationError("delta tightening needs a formula in negation normal form")
    return map_children(phi, lambda child: _tighten(child, delta))


def check_domain(values: Mapping[str, float], domains: Mapping[str, tuple[float, float]]):
    for name, value in values.items():
        if name not in domains:
            raise ParameterDomainError(f"parameter '{name}' has no declared domain")
        lo, hi = domains[name]
        if not lo <= value <= hi:
            raise ParameterDomainError(f"value {value} for parameter '{name}' is outside [{lo}, {hi}]")


def instantiate(
    phi: Formula,
    magnitude: Mapping[str, float] | None = None,
    timing: Mapping[str, float] | None = None,
    domains: Mapping[str, tuple[float, float]] | None = None,
) -> Formula:
    """φ_{u,v}: substitute magnitude values into atoms and timing values into windows.

    Parameters without a value stay symbolic. Values are checked against `domains` when given.
    """
    magnitude = dict(magnitude or {})
    timing = dict(timing or {})
    if not magnitude and not timing:
        return phi
    if domains is not None:
        check_domain(magnitude, domains)
        check_domain(timing, domains)
    return _substitute(phi, magnitude, timing)


def _bound(bound: float | Param, timing: Mapping[str, float]) -> float | Param:
    if isinstance(bound, Param) and bound.name in timing:
        return float(timing[bound.name])
    return bound


def _substitute(phi: Formula, magnitude: Mapping[str, float], timing: Mapping[str, float]) -> Formula:
    def recurse(child: Formula) -> Formula:
        return _substitute(child, magnitude, timing)

    if isinstance(phi, Atom):
        return Atom(phi.predicate.substituted(magnitude)) if phi.predicate.params else phi
    rebuilt = map_children(phi, recurse)
    interval = getattr(rebuilt, "interval", None)
    if interval is None or interval.is_numeric:
        return rebuilt
    new_interval = Interval(_bound(interval.lo, timing), _bound(interval.hi, timing))
    match rebuilt:
        case Eventually(_, child):
            return Eventually(new_interval, child)
        case Always(_, child):
            return Always(new_interval, child)
        case Until(_, left, right):
            return Until(new_interval, left, right)
        case Release(_, left, right):
            return Release(new_interval, left, right)
    return rebuilt


def validate(phi: Formula) -> Formula:
    """Check every window: 0 ≤ a < b, and b = ∞ only when a = 0. Symbolic bounds are skipped."""
    for node in iter_nodes(phi):
        interval = getattr(node, "interval", None)
        if interval is None or not interval.is_numeric:
            continue
        lo, hi = float(interval.lo), float(interval.hi)
        if lo < 0 or math.isnan(lo) or math.isnan(hi):
            raise FormulaValidationError(f"window {interval.to_text()} must start at a nonnegative time")
        if not lo < hi:
            raise FormulaValidationError(f"window {interval.to_text()} must be nonsingular with lower < upper")
        if math.isinf(hi) and lo != 0:
            raise FormulaValidationError(f"window {interval.to_text()} is unbounded but does not start at 0")
    return phi


def normalize(phi: Formula) -> Formula:
    """NNF, then bounded until / release rewriting, then window validation."""
    validate(phi)
    normalized = validate(rewrite_bounded_ur(to_nnf(phi)))
    logger.debug(f"normalized formula: {normalized.to_text()}")
    return normalized
