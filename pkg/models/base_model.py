import json
import logging
import math
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Mapping

from encoding.context import EncodingContext
from milp.model import Sense
from signals.trace import PwlTrace
from utilities.exceptions import ModelValidationError

logger = logging.getLogger(__name__)

Box = dict[str, tuple[float, float]]


def parse_range(value, where: str) -> tuple[float, float]:
    """`[lo, hi]` or a single number for a point range."""
    if isinstance(value, (int, float)):
        return float(value), float(value)
    try:
        lo, hi = value
        lo, hi = float(lo), float(hi)
    except (TypeError, ValueError):
        raise ModelValidationError(f"{where}: expected [lo, hi] or a number, got {value!r}") from None
    if math.isnan(lo) or math.isnan(hi) or lo > hi:
        raise ModelValidationError(f"{where}: empty range [{lo}, {hi}]")
    return lo, hi


def parse_box(data: Mapping | None, where: str) -> Box:
    return {name: parse_range(value, f"{where}.{name}") for name, value in (data or {}).items()}


def box_to_dict(box: Box) -> dict[str, list[float]]:
    return {name: [lo, hi] for name, (lo, hi) in box.items()}


def check_box_within(box: Box, bounds: Box, where: str):
    for name, (lo, hi) in box.items():
        if name not in bounds:
            raise ModelValidationError(f"{where}: unknown variable '{name}'")
        b_lo, b_hi = bounds[name]
        if lo < b_lo or hi > b_hi:
            raise ModelValidationError(f"{where}: [{lo}, {hi}] for '{name}' exceeds its bounds [{b_lo}, {b_hi}]")


def box_issues(box: Box, state: Mapping[str, float], tolerance: float, where: str) -> list[str]:
    issues = []
    for name, (lo, hi) in box.items():
        value = state[name]
        if value < lo - tolerance or value > hi + tolerance:
            issues.append(f"{where}: {name} = {value:g} outside [{lo:g}, {hi:g}]")
    return issues


class SystemModel(ABC):
    """A system model M whose traces L(M) are encoded over the same Γ and x_{i,v} as the formula."""

    kind: str = ""

    def __init__(self, name: str, variables: Box, initial: Box | None = None):
        self.name = name
        self.bounds: Box = dict(variables)
        self.initial: Box = dict(initial or {})
        self.horizon: float | None = None

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self.bounds)

    def variable_bounds(self) -> Box:
        return dict(self.bounds)

    def validate(self) -> "SystemModel":
        if not self.bounds:
            raise ModelValidationError(f"model '{self.name}' declares no variables")
        for name, (lo, hi) in self.bounds.items():
            if math.isinf(lo) or math.isinf(hi):
                raise ModelValidationError(f"variable '{name}' needs finite bounds, got [{lo}, {hi}]")
        check_box_within(self.initial, self.bounds, "initial")
        return self

    def encode_initial_box(self, ctx: EncodingContext):
        model = ctx.model
        for name, (lo, hi) in self.initial.items():
            x0 = ctx.state(name, 0)
            if lo == hi:
                model.add_constraint(x0, Sense.EQ, lo, f"init_{name}")
            else:
                model.add_constraint(x0, Sense.GE, lo, f"init_{name}_lo")
                model.add_constraint(x0, Sense.LE, hi, f"init_{name}_hi")

    @abstractmethod
    def encode(self, ctx: EncodingContext):
        """Add Enc_model to `ctx.model`; the trace variables are already registered."""

    def check_trace(self, trace: PwlTrace, values: Mapping[str, float], tolerance: float = 1e-6) -> list[str]:
        """Model-specific checks of a decoded trace against the solver assignment. Empty when valid."""
        issues = []
        for i, state in enumerate(trace.states):
            issues.extend(box_issues(self.bounds, state, tolerance, f"knot {i}"))
        issues.extend(box_issues(self.initial, trace.states[0], tolerance, "initial state"))
        return issues

    @classmethod
    @abstractmethod
    def from_dict(cls, data: dict) -> "SystemModel":
        pass

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "name": self.name,
            "variables": box_to_dict(self.bounds),
            "initial": box_to_dict(self.initial),
            **({"horizon": self.horizon} if self.horizon is not None else {}),
        }

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, variables={list(self.variables)})"


class ModelFactory:
    @staticmethod
    def from_dict(data: dict) -> SystemModel:
        kind = data.get("kind")
        if kind == "identity":
            from models.identity import IdentityModel

            model = IdentityModel.from_dict(data)
        elif kind == "rha":
            from models.rha import RectangularHybridAutomaton

            model = RectangularHybridAutomaton.from_dict(data)
        elif kind == "double_integrator":
            from models.double_integrator import DoubleIntegratorModel

            model = DoubleIntegratorModel.from_dict(data)
        elif kind == "closed_form":
            from models.closed_form import ClosedFormHybridAutomaton

            model = ClosedFormHybridAutomaton.from_dict(data)
        else:
            raise ModelValidationError(f"Unknown model kind: {kind}")
        if model.horizon is None and data.get("horizon") is not None:
            model.horizon = float(data["horizon"])
        return model.validate()

    @staticmethod
    def load(path: str | Path) -> SystemModel:
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as handle:
                data = json.load(handle)
        except json.JSONDecodeError as e:
            raise ModelValidationError(f"{path}: invalid JSON ({e.msg}, line {e.lineno})") from e
        data.setdefault("name", path.stem)
        logger.debug(f"Loaded {data.get('kind')} model '{data['name']}' from {path}")
        return ModelFactory.from_dict(data)
