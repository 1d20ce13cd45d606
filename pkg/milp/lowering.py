import logging
import math
from typing import Mapping

from milp.model import CondConstraint, LinConstraint, MilpModel, MilpVar, Sense
from utilities.config import DEFAULT_M_MAX
from utilities.exceptions import BigMError

logger = logging.getLogger(__name__)


def expression_range(terms: Mapping[str, float], variables: Mapping[str, MilpVar], context: str = "") -> tuple[float, float]:
    """[min, max] of Σ aᵢxᵢ over the declared bounds. Unbounded variables are an error."""
    lo = hi = 0.0
    for name, coeff in terms.items():
        var = variables[name]
        if math.isinf(var.lower) or math.isinf(var.upper):
            raise BigMError(f"variable '{name}' in {context or 'a conditional constraint'} has no finite bounds")
        low, high = coeff * var.lower, coeff * var.upper
        lo += min(low, high)
        hi += max(low, high)
    return lo, hi


def lower_conditional(cond: CondConstraint, variables: Mapping[str, MilpVar], m_max: float = DEFAULT_M_MAX):
    """The big-M row for one guarded constraint, or None when the body already holds on the bounds.

    A=0 ⇒ f ≥ a  becomes  f − a ≥ −M·A   with M = a − min f
    A=1 ⇒ f ≥ a  becomes  f − a ≥ −M·(1 − A)
    A=0 ⇒ f ≤ a  becomes  f − a ≤ M·A    with M = max f − a
    A=1 ⇒ f ≤ a  becomes  f − a ≤ M·(1 − A)
    """
    body = cond.body
    f_min, f_max = expression_range(body.terms, variables, f"conditional '{cond.name}'")
    big_m = body.rhs - f_min if body.sense is Sense.GE else f_max - body.rhs
    if big_m <= 0:
        return None
    if big_m > m_max:
        raise BigMError(f"conditional '{cond.name}' needs M = {big_m:g}, above the cap {m_max:g}")

    # GE rows relax downwards (−M), LE rows upwards (+M)
    direction = -1.0 if body.sense is Sense.GE else 1.0
    terms = dict(body.terms)
    rhs = body.rhs
    if cond.guard_value == 0:
        terms[cond.guard] = terms.get(cond.guard, 0.0) - direction * big_m
    else:
        terms[cond.guard] = terms.get(cond.guard, 0.0) + direction * big_m
        rhs += direction * big_m
    terms = {name: coeff for name, coeff in terms.items() if coeff != 0}
    return LinConstraint(terms, body.sense, rhs, cond.name)


def lower_conditionals(model: MilpModel, m_max: float = DEFAULT_M_MAX) -> MilpModel:
    """A copy of `model` with every guarded constraint replaced by its big-M row."""
    if not model.conditionals:
        return model
    lowered = model.copy()
    lowered.conditionals = []
    skipped = 0
    for cond in model.conditionals:
        row = lower_conditional(cond, model.vars, m_max)
        if row is None:
            skipped += 1
            continue
        lowered.constraints.append(row)
    logger.debug(
        f"Lowered {len(model.conditionals)} conditional constraints ({skipped} redundant on the declared bounds)"
    )
    return lowered


def conditional_holds(cond: CondConstraint, values: Mapping[str, float], tolerance: float = 1e-6) -> bool:
    if round(values[cond.guard]) != cond.guard_value:
        return True
    return cond.body.violation(values) <= tolerance * cond.body.scale(values)
