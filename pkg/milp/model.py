"""Solver-independent MILP models: variables, linear and guarded constraints, objective."""

import copy
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Union

from utilities.exceptions import EncodingError


class VarKind(enum.Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense(enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="


class ObjectiveSense(enum.Enum):
    MINIMIZE = "min"
    MAXIMIZE = "max"
    FEASIBILITY = "feasibility"


@dataclass(frozen=True)
class MilpVar:
    name: str
    kind: VarKind
    lower: float
    upper: float

    @property
    def is_binary(self) -> bool:
        return self.kind is VarKind.BINARY

    @property
    def is_fixed(self) -> bool:
        return self.lower == self.upper

    def __add__(self, other):
        return LinExpr.of(self) + other

    __radd__ = __add__

    def __sub__(self, other):
        return LinExpr.of(self) - other

    def __rsub__(self, other):
        return LinExpr.of(other) - self

    def __mul__(self, factor: float):
        return LinExpr.of(self) * factor

    __rmul__ = __mul__

    def __neg__(self):
        return LinExpr.of(self) * -1.0


Operand = Union["LinExpr", MilpVar, float, int]


class LinExpr:
    """Σ aᵢ·xᵢ + const over variable names."""

    def __init__(self, terms: Mapping[str, float] | None = None, const: float = 0.0):
        self.terms: dict[str, float] = dict(terms or {})
        self.const = float(const)

    @classmethod
    def of(cls, value: Operand) -> "LinExpr":
        if isinstance(value, LinExpr):
            return value
        if isinstance(value, MilpVar):
            return cls({value.name: 1.0})
        if isinstance(value, (int, float)):
            return cls(const=value)
        raise TypeError(f"cannot build a linear expression from {type(value).__name__}")

    @classmethod
    def sum(cls, items: Iterable[Operand]) -> "LinExpr":
        result = cls()
        for item in items:
            result = result + item
        return result

    def __add__(self, other: Operand) -> "LinExpr":
        other = LinExpr.of(other)
        terms = dict(self.terms)
        for name, coeff in other.terms.items():
            terms[name] = terms.get(name, 0.0) + coeff
        return LinExpr(terms, self.const + other.const)

    __radd__ = __add__

    def __sub__(self, other: Operand) -> "LinExpr":
        return self + LinExpr.of(other) * -1.0

    def __rsub__(self, other: Operand) -> "LinExpr":
        return LinExpr.of(other) - self

    def __mul__(self, factor: float) -> "LinExpr":
        return LinExpr({name: coeff * factor for name, coeff in self.terms.items()}, self.const * factor)

    __rmul__ = __mul__

    def __neg__(self) -> "LinExpr":
        return self * -1.0

    def nonzero_terms(self) -> dict[str, float]:
        return {name: coeff for name, coeff in self.terms.items() if coeff != 0}

    def evaluate(self, values: Mapping[str, float]) -> float:
        return self.const + sum(coeff * values[name] for name, coeff in self.terms.items())

    def __repr__(self) -> str:
        body = " ".join(f"{coeff:+g}·{name}" for name, coeff in self.terms.items())
        return f"LinExpr({body} {self.const:+g})"


@dataclass
class LinConstraint:
    terms: dict[str, float]
    sense: Sense
    rhs: float
    name: str = ""

    def activity(self, values: Mapping[str, float]) -> float:
        return sum(coeff * values[name] for name, coeff in self.terms.items())

    def violation(self, values: Mapping[str, float]) -> float:
        """How far the row is from holding; 0 when it holds."""
        lhs = self.activity(values)
        if self.sense is Sense.LE:
            return max(0.0, lhs - self.rhs)
        if self.sense is Sense.GE:
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)

    def scale(self, values: Mapping[str, float]) -> float:
        return max(1.0, sum(abs(coeff * values[name]) for name, coeff in self.terms.items()), abs(self.rhs))


@dataclass
class CondConstraint:
    """guard = guard_value ⇒ body, with a ≤ or ≥ body."""

    guard: str
    guard_value: int
    body: LinConstraint
    name: str = ""


@dataclass
class Objective:
    sense: ObjectiveSense = ObjectiveSense.FEASIBILITY
    terms: dict[str, float] = field(default_factory=dict)
    const: float = 0.0

    def evaluate(self, values: Mapping[str, float]) -> float:
        return self.const + sum(coeff * values[name] for name, coeff in self.terms.items())


def _holds(lhs: float, sense: Sense, rhs: float, tolerance: float = 1e-12) -> bool:
    if sense is Sense.LE:
        return lhs <= rhs + tolerance
    if sense is Sense.GE:
        return lhs >= rhs - tolerance
    return abs(lhs - rhs) <= tolerance


class MilpModel:
    def __init__(self, name: str = "stlts"):
        self.name = name
        self.vars: dict[str, MilpVar] = {}
        self.constraints: list[LinConstraint] = []
        self.conditionals: list[CondConstraint] = []
        self.objective = Objective()
        self._names: set[str] = set()

    def _add_var(self, var: MilpVar) -> MilpVar:
        if var.name in self.vars:
            raise EncodingError(f"variable '{var.name}' is declared twice")
        if math.isnan(var.lower) or math.isnan(var.upper) or var.lower > var.upper:
            raise EncodingError(f"variable '{var.name}' has empty bounds [{var.lower}, {var.upper}]")
        self.vars[var.name] = var
        return var

    def add_continuous(self, name: str, lower: float, upper: float) -> MilpVar:
        return self._add_var(MilpVar(name, VarKind.CONTINUOUS, float(lower), float(upper)))

    def add_binary(self, name: str) -> MilpVar:
        return self._add_var(MilpVar(name, VarKind.BINARY, 0.0, 1.0))

    def var(self, name: str) -> MilpVar:
        try:
            return self.vars[name]
        except KeyError:
            raise EncodingError(f"variable '{name}' is not declared") from None

    def fix(self, var: MilpVar | str, value: float) -> MilpVar:
        current = self.var(var if isinstance(var, str) else var.name)
        if not current.lower <= value <= current.upper:
            raise EncodingError(f"cannot fix '{current.name}' to {value} outside [{current.lower}, {current.upper}]")
        fixed = replace(current, lower=float(value), upper=float(value))
        self.vars[current.name] = fixed
        return fixed

    def _unique_name(self, name: str | None, prefix: str, count: int) -> str:
        candidate = name or f"{prefix}{count}"
        if candidate in self._names:
            suffix = 1
            while f"{candidate}_{suffix}" in self._names:
                suffix += 1
            candidate = f"{candidate}_{suffix}"
        self._names.add(candidate)
        return candidate

    def _body(self, expr: Operand, rhs: float) -> tuple[dict[str, float], float]:
        expr = LinExpr.of(expr)
        terms = expr.nonzero_terms()
        for name in terms:
            if name not in self.vars:
                raise EncodingError(f"constraint uses undeclared variable '{name}'")
        return terms, float(rhs) - expr.const

    def add_constraint(self, expr: Operand, sense: Sense, rhs: float = 0.0, name: str | None = None):
        """Add expr (sense) rhs. Constant rows are checked immediately and not stored."""
        terms, rhs = self._body(expr, rhs)
        if not terms:
            if _holds(0.0, sense, rhs):
                return None
            raise EncodingError(f"constraint {name or ''} reduces to the contradiction 0 {sense.value} {rhs}")
        constraint = LinConstraint(terms, sense, rhs, self._unique_name(name, "c", len(self.constraints)))
        self.constraints.append(constraint)
        return constraint

    def add_conditional(
        self, guard: MilpVar | str, guard_value: int, expr: Operand, sense: Sense, rhs: float = 0.0, name: str | None = None
    ):
        """guard = guard_value ⇒ expr (sense) rhs. Equalities become two guarded inequalities."""
        guard_var = self.var(guard if isinstance(guard, str) else guard.name)
        if not guard_var.is_binary:
            raise EncodingError(f"guard '{guard_var.name}' must be binary")
        if sense is Sense.EQ:
            base = name or f"cc{len(self.conditionals)}"
            self.add_conditional(guard_var, guard_value, expr, Sense.LE, rhs, f"{base}_le")
            self.add_conditional(guard_var, guard_value, expr, Sense.GE, rhs, f"{base}_ge")
            return
        terms, rhs = self._body(expr, rhs)
        if not terms:
            if not _holds(0.0, sense, rhs):
                # body is false, so the guard can never take guard_value
                self.add_constraint(LinExpr.of(guard_var), Sense.EQ, 1 - guard_value, name)
            return
        body = LinConstraint(terms, sense, rhs)
        cond_name = self._unique_name(name, "cc", len(self.conditionals))
        self.conditionals.append(CondConstraint(guard_var.name, int(guard_value), body, cond_name))

    def add_not(self, z: MilpVar, a: MilpVar, name: str | None = None):
        """Z = ¬A."""
        self.add_constraint(z + a, Sense.EQ, 1.0, name)

    def add_and(self, z: MilpVar, operands: Iterable[MilpVar], name: str | None = None):
        """Z = ⋀ Aⱼ: Z ≤ Aⱼ for every j, Z ≥ Σ Aⱼ − (m − 1)."""
        operands = list(operands)
        for index, a in enumerate(operands):
            self.add_constraint(z - a, Sense.LE, 0.0, f"{name}_{index}" if name else None)
        self.add_constraint(z - LinExpr.sum(operands), Sense.GE, 1.0 - len(operands), name)

    def add_or(self, z: MilpVar, operands: Iterable[MilpVar], name: str | None = None):
        """Z = ⋁ Aⱼ: Z ≥ Aⱼ for every j, Z ≤ Σ Aⱼ."""
        operands = list(operands)
        for index, a in enumerate(operands):
            self.add_constraint(z - a, Sense.GE, 0.0, f"{name}_{index}" if name else None)
        self.add_constraint(z - LinExpr.sum(operands), Sense.LE, 0.0, name)

    def set_objective(self, sense: ObjectiveSense, expr: Operand = 0.0):
        expr = LinExpr.of(expr)
        terms, _ = self._body(expr, 0.0)
        self.objective = Objective(sense, terms, expr.const)

    def copy(self) -> "MilpModel":
        return copy.deepcopy(self)

    def stats(self) -> dict[str, int]:
        binaries = sum(1 for v in self.vars.values() if v.is_binary)
        return {
            "variables": len(self.vars),
            "binaries": binaries,
            "continuous": len(self.vars) - binaries,
            "constraints": len(self.constraints),
            "conditionals": len(self.conditionals),
        }

    def __repr__(self) -> str:
        return f"MilpModel({self.name}, {self.stats()})"
