"""CPLEX LP text for lowered models. Output is deterministic: declaration order throughout."""

import math
from pathlib import Path
from typing import Mapping

from milp.model import MilpModel, ObjectiveSense
from utilities.exceptions import EncodingError

TERMS_PER_LINE = 8


def format_number(value: float) -> str:
    text = "%.12g" % value
    return "0" if text == "-0" else text


def _format_terms(terms: Mapping[str, float]) -> str:
    parts = []
    for index, (name, coeff) in enumerate(terms.items()):
        if index and index % TERMS_PER_LINE == 0:
            parts.append("\n   ")
        sign = "-" if coeff < 0 else "+"
        magnitude = abs(coeff)
        body = name if magnitude == 1 else f"{format_number(magnitude)} {name}"
        if index == 0:
            parts.append(f"- {body}" if sign == "-" else body)
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


def _bound_line(name: str, lower: float, upper: float) -> str:
    if lower == upper:
        return f" {name} = {format_number(lower)}"
    if math.isinf(lower) and math.isinf(upper):
        return f" {name} free"
    if math.isinf(upper):
        return f" {name} >= {format_number(lower)}"
    low = "-inf" if math.isinf(lower) else format_number(lower)
    return f" {low} <= {name} <= {format_number(upper)}"


def write_lp(model: MilpModel) -> str:
    if model.conditionals:
        raise EncodingError("lower conditional constraints before writing an LP file")

    referenced = set(model.objective.terms)
    for constraint in model.constraints:
        referenced.update(constraint.terms)

    objective = dict(model.objective.terms) if model.objective.sense is not ObjectiveSense.FEASIBILITY else {}
    # Variables that appear nowhere else are declared through the objective with a zero coefficient.
    padding = {name: 0.0 for name in model.vars if name not in referenced}
    if not objective and not padding and model.vars:
        padding[next(iter(model.vars))] = 0.0

    lines = [f"\\ {model.name}"]
    lines.append("Maximize" if model.objective.sense is ObjectiveSense.MAXIMIZE else "Minimize")
    objective_text = _format_terms(objective) if objective else ""
    if padding:
        zeros = " + ".join(f"0 {name}" for name in padding)
        objective_text = f"{objective_text} + {zeros}" if objective_text else zeros
    lines.append(f" obj: {objective_text or '0'}")

    lines.append("Subject To")
    for constraint in model.constraints:
        lines.append(
            f" {constraint.name}: {_format_terms(constraint.terms)} {constraint.sense.value} {format_number(constraint.rhs)}"
        )

    lines.append("Bounds")
    binaries = []
    for var in model.vars.values():
        if var.is_binary:
            binaries.append(var.name)
            if var.is_fixed:
                lines.append(_bound_line(var.name, var.lower, var.upper))
            continue
        lines.append(_bound_line(var.name, var.lower, var.upper))

    if binaries:
        lines.append("Binaries")
        lines.extend(f" {name}" for name in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp_file(model: MilpModel, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(write_lp(model), encoding="utf-8")
    return path
