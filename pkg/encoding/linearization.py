"""MILP gadgets: disjunctions of linear conditions, binary × continuous products and binary
expansion of a bounded continuous quantity."""

from dataclasses import dataclass
from typing import Sequence

from milp.lowering import expression_range
from milp.model import LinExpr, MilpModel, MilpVar, Operand, Sense


@dataclass(frozen=True)
class Condition:
    """expr (sense) rhs, one disjunct of a disjunctive constraint."""

    expr: LinExpr
    sense: Sense
    rhs: float = 0.0


@dataclass(frozen=True)
class BinaryExpansion:
    """target = step · Σ 2ᵏ·bitsₖ + residual, residual ∈ [0, step]."""

    bits: tuple[MilpVar, ...]
    step: float
    residual: MilpVar

    @property
    def weights(self) -> list[float]:
        return [self.step * 2**k for k in range(len(self.bits))]


def literal(var: MilpVar, value: int) -> LinExpr:
    """The 0/1 expression that is 1 exactly when `var` = value."""
    return LinExpr.of(var) if value == 1 else 1 - var


def add_disjunction(
    model: MilpModel,
    name: str,
    literals: Sequence[LinExpr],
    conditions: Sequence[Condition],
    make_binary,
):
    """⋁ literals ∨ ⋁ conditions. Each condition f ≥ 0 gets a binary Z with Z = 1 ⇒ f ≥ 0.

    `make_binary(tag)` creates the Z variables so callers control naming.
    """
    terms = list(literals)
    for index, condition in enumerate(conditions):
        z = make_binary(f"z{index}")
        model.add_conditional(z, 1, condition.expr, condition.sense, condition.rhs, f"{name}_z{index}")
        terms.append(LinExpr.of(z))
    model.add_constraint(LinExpr.sum(terms), Sense.GE, 1.0, name)


def expression_bounds(model: MilpModel, expr: Operand) -> tuple[float, float]:
    expr = LinExpr.of(expr)
    lo, hi = expression_range(expr.nonzero_terms(), model.vars)
    return lo + expr.const, hi + expr.const


def add_product(model: MilpModel, name: str, binary: MilpVar, expr: Operand) -> MilpVar:
    """y = binary · expr for a bounded linear expression."""
    lo, hi = expression_bounds(model, expr)
    y = model.add_continuous(name, min(0.0, lo), max(0.0, hi))
    model.add_conditional(binary, 0, y, Sense.EQ, 0.0, f"{name}_off")
    model.add_conditional(binary, 1, y - expr, Sense.EQ, 0.0, f"{name}_on")
    return y


def add_binary_expansion(model: MilpModel, name: str, target: Operand, upper: float, bits: int) -> BinaryExpansion:
    """Expand a quantity in [0, upper] over the grid upper / (2^bits − 1)."""
    step = upper / (2**bits - 1)
    digits = tuple(model.add_binary(f"{name}_b{k}") for k in range(bits))
    residual = model.add_continuous(f"{name}_r", 0.0, step)
    grid = LinExpr.sum(step * 2**k * b for k, b in enumerate(digits))
    model.add_constraint(LinExpr.of(target) - grid - residual, Sense.EQ, 0.0, f"{name}_expand")
    return BinaryExpansion(digits, step, residual)


def add_expanded_product(model: MilpModel, name: str, expansion: BinaryExpansion, expr: Operand) -> LinExpr:
    """≈ target · expr as Σ wₖ·(bitₖ · expr). The residual's share is dropped, so the error is at most
    step · max|expr|."""
    products = [add_product(model, f"{name}_{k}", bit, expr) for k, bit in enumerate(expansion.bits)]
    return LinExpr.sum(w * y for w, y in zip(expansion.weights, products, strict=True))
