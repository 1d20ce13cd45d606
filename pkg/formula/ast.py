"""STL / PSTL abstract syntax.

All nodes are frozen dataclasses, so formulas are hashable and can key the encoder's
per-subformula variable tables. Structurally equal subformulas are the same subformula.
"""

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

from utilities.exceptions import FormulaValidationError


@dataclass(frozen=True)
class Param:
    """A PSTL parameter symbol (magnitude or timing)."""

    name: str

    def __str__(self) -> str:
        return self.name


Bound = float | Param


def _format_number(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return repr(float(value))


@dataclass(frozen=True)
class LinearPredicate:
    """The closed half-space c⊤x + b + Σ k·p ≥ 0.

    `coeffs` and `params` are sorted tuples of (name, coefficient) so the predicate is hashable.
    `params` holds magnitude-parameter coefficients and is empty for plain STL atoms.
    """

    coeffs: tuple[tuple[str, float], ...]
    offset: float
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if not self.coeffs:
            raise FormulaValidationError("linear predicate needs at least one variable coefficient")

    @classmethod
    def from_terms(
        cls, coeffs: Mapping[str, float], offset: float, params: Mapping[str, float] | None = None
    ) -> "LinearPredicate":
        clean = tuple(sorted((name, float(c)) for name, c in coeffs.items() if c != 0))
        clean_params = tuple(sorted((name, float(c)) for name, c in (params or {}).items() if c != 0))
        return cls(clean, float(offset), clean_params)

    @property
    def coeff_map(self) -> dict[str, float]:
        return dict(self.coeffs)

    @property
    def param_map(self) -> dict[str, float]:
        return dict(self.params)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.coeffs)

    def margin(self, state: Mapping[str, float], param_values: Mapping[str, float] | None = None) -> float:
        value = self.offset + sum(c * state[name] for name, c in self.coeffs)
        if self.params:
            if param_values is None:
                raise FormulaValidationError(f"predicate {self} needs parameter values")
            value += sum(c * param_values[name] for name, c in self.params)
        return value

    def negated(self) -> "LinearPredicate":
        """p⁻ : −c⊤x − b ≥ 0."""
        return LinearPredicate(
            tuple((n, -c) for n, c in self.coeffs), -self.offset, tuple((n, -c) for n, c in self.params)
        )

    def tightened(self, delta: float) -> "LinearPredicate":
        return LinearPredicate(self.coeffs, self.offset - delta, self.params)

    def substituted(self, values: Mapping[str, float]) -> "LinearPredicate":
        offset = self.offset + sum(c * values[name] for name, c in self.params if name in values)
        remaining = tuple((n, c) for n, c in self.params if n not in values)
        return LinearPredicate(self.coeffs, offset, remaining)

    def to_text(self) -> str:
        parts = []
        for index, (name, coeff) in enumerate(list(self.coeffs) + list(self.params)):
            sign = "-" if coeff < 0 else "+"
            magnitude = _format_number(abs(coeff))
            if index == 0:
                parts.append(f"{'-' if coeff < 0 else ''}{magnitude} * {name}")
            else:
                parts.append(f"{sign} {magnitude} * {name}")
        sign = "-" if self.offset < 0 else "+"
        parts.append(f"{sign} {_format_number(abs(self.offset))}")
        return " ".join(parts) + " >= 0.0"

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class Interval:
    lo: Bound = 0.0
    hi: Bound = math.inf

    @property
    def is_numeric(self) -> bool:
        return not isinstance(self.lo, Param) and not isinstance(self.hi, Param)

    @property
    def is_unbounded(self) -> bool:
        """True for the [0, ∞) window that the unbounded encodings handle."""
        return self.is_numeric and self.lo == 0 and math.isinf(self.hi)

    def to_text(self) -> str:
        lo = self.lo.name if isinstance(self.lo, Param) else _format_number(self.lo)
        hi = self.hi.name if isinstance(self.hi, Param) else _format_number(self.hi)
        return f"[{lo}, {hi}]"


UNBOUNDED = Interval(0.0, math.inf)


class Formula:
    """Base of all STL nodes."""

    @property
    def children(self) -> tuple["Formula", ...]:
        return ()

    def to_text(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class Atom(Formula):
    predicate: LinearPredicate

    def to_text(self) -> str:
        return f"({self.predicate.to_text()})"


@dataclass(frozen=True)
class TrueFormula(Formula):
    def to_text(self) -> str:
        return "true"


@dataclass(frozen=True)
class FalseFormula(Formula):
    def to_text(self) -> str:
        return "false"


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.child,)

    def to_text(self) -> str:
        return f"!{self.child.to_text()}"


@dataclass(frozen=True)
class And(Formula):
    operands: tuple[Formula, ...]

    def __post_init__(self):
        if len(self.operands) < 2:
            raise FormulaValidationError("conjunction needs at least two operands")

    @property
    def children(self) -> tuple[Formula, ...]:
        return self.operands

    def to_text(self) -> str:
        return "(" + " && ".join(op.to_text() for op in self.operands) + ")"


@dataclass(frozen=True)
class Or(Formula):
    operands: tuple[Formula, ...]

    def __post_init__(self):
        if len(self.operands) < 2:
            raise FormulaValidationError("disjunction needs at least two operands")

    @property
    def children(self) -> tuple[Formula, ...]:
        return self.operands

    def to_text(self) -> str:
        return "(" + " || ".join(op.to_text() for op in self.operands) + ")"


def _window_text(interval: Interval) -> str:
    return "" if interval == UNBOUNDED else interval.to_text()


@dataclass(frozen=True)
class Eventually(Formula):
    interval: Interval
    child: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.child,)

    def to_text(self) -> str:
        return f"(F{_window_text(self.interval)} {self.child.to_text()})"


@dataclass(frozen=True)
class Always(Formula):
    interval: Interval
    child: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.child,)

    def to_text(self) -> str:
        return f"(G{_window_text(self.interval)} {self.child.to_text()})"


@dataclass(frozen=True)
class Until(Formula):
    interval: Interval
    left: Formula
    right: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)

    def to_text(self) -> str:
        return f"({self.left.to_text()} U{_window_text(self.interval)} {self.right.to_text()})"


@dataclass(frozen=True)
class Release(Formula):
    interval: Interval
    left: Formula
    right: Formula

    @property
    def children(self) -> tuple[Formula, ...]:
        return (self.left, self.right)

    def to_text(self) -> str:
        return f"({self.left.to_text()} R{_window_text(self.interval)} {self.right.to_text()})"


TemporalUnary = Eventually | Always
TemporalBinary = Until | Release


def map_children(phi: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    """Rebuild `phi` with `fn` applied to each direct child. Leaves are returned as is."""
    match phi:
        case Not(child):
            return Not(fn(child))
        case And(operands):
            return And(tuple(fn(op) for op in operands))
        case Or(operands):
            return Or(tuple(fn(op) for op in operands))
        case Eventually(interval, child):
            return Eventually(interval, fn(child))
        case Always(interval, child):
            return Always(interval, fn(child))
        case Until(interval, left, right):
            return Until(interval, fn(left), fn(right))
        case Release(interval, left, right):
            return Release(interval, fn(left), fn(right))
        case _:
            return phi


def iter_nodes(phi: Formula) -> Iterator[Formula]:
    """Post-order traversal, children before parents."""
    for child in phi.children:
        yield from iter_nodes(child)
    yield phi


def subformulas(phi: Formula) -> list[Formula]:
    """Sub(φ): every subformula once, children before parents, φ itself last."""
    seen: dict[Formula, None] = {}
    for node in iter_nodes(phi):
        seen.setdefault(node, None)
    return list(seen)


def atoms(phi: Formula) -> list[LinearPredicate]:
    """AP(φ) in first-occurrence order."""
    seen: dict[LinearPredicate, None] = {}
    for node in iter_nodes(phi):
        if isinstance(node, Atom):
            seen.setdefault(node.predicate, None)
    return list(seen)


def formula_variables(phi: Formula) -> set[str]:
    return {name for predicate in atoms(phi) for name in predicate.variables}


def magnitude_parameters(phi: Formula) -> set[str]:
    return {name for predicate in atoms(phi) for name, _ in predicate.params}


def timing_parameters(phi: Formula) -> set[str]:
    names = set()
    for node in iter_nodes(phi):
        interval = getattr(node, "interval", None)
        if interval is None:
            continue
        for bound in (interval.lo, interval.hi):
            if isinstance(bound, Param):
                names.add(bound.name)
    return names


def formula_parameters(phi: Formula) -> set[str]:
    return magnitude_parameters(phi) | timing_parameters(phi)


def to_text(phi: Formula) -> str:
    return phi.to_text()
