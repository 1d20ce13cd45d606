"""Solver results, the normalized solution-file format and checked assignments."""

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

from milp.lowering import conditional_holds
from milp.model import MilpModel
from utilities.exceptions import SolutionViolationError, SolverError

logger = logging.getLogger(__name__)

BIND_TOLERANCE = 1e-6
# Binaries farther than this from 0 or 1 are not integral; solvers are run with the same tolerance.
INTEGRALITY_TOLERANCE = 1e-6


class SolveStatus(enum.Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIME_LIMIT = "TimeLimit"
    ERROR = "Error"

    @property
    def has_solution(self) -> bool:
        return self in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE)


@dataclass
class SolveResult:
    status: SolveStatus
    values: dict[str, float] = field(default_factory=dict)
    objective: float | None = None
    output: str = ""
    runtime: float = 0.0
    adapter: str = ""

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "objective": self.objective,
            "runtime": round(self.runtime, 6),
            "adapter": self.adapter,
        }


def format_solution(status: SolveStatus, values: Mapping[str, float]) -> str:
    """`status` on the first line, then one `name value` line per variable."""
    lines = [status.value]
    lines.extend(f"{name} {value!r}" for name, value in values.items())
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> tuple[SolveStatus, dict[str, float]]:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise SolverError("empty solution file")
    try:
        status = SolveStatus(lines[0])
    except ValueError:
        raise SolverError(f"unknown solution status '{lines[0]}'", text) from None
    values = {}
    for number, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise SolverError(f"malformed solution line {number}: '{line}'", text)
        try:
            values[parts[0]] = float(parts[1])
        except ValueError:
            raise SolverError(f"malformed value on solution line {number}: '{line}'", text) from None
    return status, values


def _nearest_to_zero(lower: float, upper: float) -> float:
    if lower <= 0.0 <= upper:
        return 0.0
    return lower if lower > 0 else upper


def fractional_binaries(
    model: MilpModel, values: Mapping[str, float], tolerance: float = INTEGRALITY_TOLERANCE
) -> dict[str, float]:
    """Binaries whose value lies farther than `tolerance` from 0 or 1, with that distance."""
    fractional = {}
    for name, var in model.vars.items():
        if var.is_binary and name in values:
            value = float(values[name])
            gap = abs(value - min(max(round(value), 0), 1))
            if gap > tolerance:
                fractional[name] = gap
    return fractional


def bind_solution(model: MilpModel, values: Mapping[str, float], tolerance: float = BIND_TOLERANCE) -> dict[str, float]:
    """Round binaries, clamp continuous values into their bounds and re-check every row.

    Solvers omit variables they never had to touch; those take the in-bounds value nearest 0.
    Rows are checked with the relative tolerance `tolerance · max(1, Σ|aᵢxᵢ|, |rhs|)`.
    """
    bound: dict[str, float] = {}
    missing = []
    for name, var in model.vars.items():
        if name not in values:
            missing.append(name)
            bound[name] = _nearest_to_zero(var.lower, var.upper)
            continue
        value = float(values[name])
        if math.isnan(value):
            raise SolutionViolationError(f"solver returned NaN for '{name}'", name, math.inf)
        if var.is_binary:
            rounded = round(value)
            if abs(value - rounded) > tolerance or rounded not in (0, 1):
                raise SolutionViolationError(
                    f"binary '{name}' has non-integral value {value}", name, abs(value - rounded)
                )
            value = float(rounded)
        if value < var.lower - tolerance or value > var.upper + tolerance:
            gap = max(var.lower - value, value - var.upper)
            raise SolutionViolationError(
                f"'{name}' = {value} lies outside [{var.lower}, {var.upper}]", name, gap
            )
        bound[name] = min(max(value, var.lower), var.upper)
    if missing:
        logger.debug(f"{len(missing)} variables absent from the solution were set to their value nearest 0")

    worst_name, worst = "", 0.0
    for constraint in model.constraints:
        violation = constraint.violation(bound) / constraint.scale(bound)
        if violation > worst:
            worst_name, worst = constraint.name, violation
    for cond in model.conditionals:
        if not conditional_holds(cond, bound, tolerance):
            violation = cond.body.violation(bound) / cond.body.scale(bound)
            if violation > worst:
                worst_name, worst = cond.name, violation
    if worst > tolerance:
        logger.error(f"Solution violates '{worst_name}' by {worst:.3g} (relative)")
        raise SolutionViolationError(
            f"solution violates constraint '{worst_name}' by {worst:.3g}", worst_name, worst
        )
    return bound
