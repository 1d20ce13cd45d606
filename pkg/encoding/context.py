"""Shared state of one encoding: the MILP model, the time sequence, trace variables and the
per-subformula valuation variables, plus a symbol table for `--dump-encoding`."""

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping

from formula.ast import (
    Formula,
    LinearPredicate,
    Not,
    Release,
    Until,
    atoms,
    formula_variables,
    iter_nodes,
    magnitude_parameters,
    subformulas,
    timing_parameters,
)
from milp.model import LinExpr, MilpModel, MilpVar
from utilities.config import EncodingConfig
from utilities.exceptions import EncodingError

logger = logging.getLogger(__name__)


@dataclass
class VariableRegistry:
    gamma: list[MilpVar] = field(default_factory=list)
    theta: dict[Formula, list[MilpVar]] = field(default_factory=dict)
    states: dict[str, list[MilpVar]] = field(default_factory=dict)
    zeta: dict[LinearPredicate, list[MilpVar]] = field(default_factory=dict)
    zeta_delta: dict[LinearPredicate, list[MilpVar]] = field(default_factory=dict)
    always_acc: dict[Formula, list[MilpVar]] = field(default_factory=dict)
    eventually_acc: dict[Formula, list[MilpVar]] = field(default_factory=dict)
    params: dict[str, MilpVar] = field(default_factory=dict)
    aux: list[MilpVar] = field(default_factory=list)
    symbols: dict[str, str] = field(default_factory=dict)

    def sizes(self) -> dict[str, int]:
        return {
            "gamma": len(self.gamma),
            "theta": sum(len(v) for v in self.theta.values()),
            "state": sum(len(v) for v in self.states.values()),
            "zeta": sum(len(v) for v in self.zeta.values()),
            "zeta_delta": sum(len(v) for v in self.zeta_delta.values()),
            "S": sum(len(v) for v in self.always_acc.values()),
            "P": sum(len(v) for v in self.eventually_acc.values()),
            "params": len(self.params),
            "aux": len(self.aux),
        }

    def symbol_map(self) -> dict[str, str]:
        return dict(self.symbols)


class EncodingContext:
    """Var(φ, N) for one (φ, N, T, δ, ε) together with the model it lives in.

    System-model encoders add their own variables and constraints to `self.model`, sharing
    `gamma` and the trace variables `state(v, i)`.
    """

    def __init__(
        self,
        phi: Formula,
        n: int,
        horizon: float,
        config: EncodingConfig,
        variables: Mapping[str, tuple[float, float]],
        param_domains: Mapping[str, tuple[float, float]] | None = None,
        name: str = "stlts",
    ):
        if n < 1:
            raise EncodingError(f"N must be at least 1, got {n}")
        if not horizon > 0 or math.isinf(horizon):
            raise EncodingError(f"horizon must be a positive real, got {horizon}")
        _check_normalized(phi)
        if timing_parameters(phi):
            raise EncodingError(f"timing parameters {sorted(timing_parameters(phi))} must be instantiated before encoding")
        missing = formula_variables(phi) - set(variables)
        if missing:
            raise EncodingError(f"formula uses variables absent from the model: {', '.join(sorted(missing))}")
        param_domains = dict(param_domains or {})
        undeclared = magnitude_parameters(phi) - set(param_domains)
        if undeclared:
            raise EncodingError(f"parameters without a bounded domain: {', '.join(sorted(undeclared))}")

        self.phi = phi
        self.n = n
        self.horizon = float(horizon)
        self.config = config
        self.delta = config.delta
        self.epsilon = config.epsilon
        self.variables = dict(variables)
        self.model = MilpModel(name)
        self.registry = VariableRegistry()
        self.subformulas = subformulas(phi)
        self.index = {psi: k for k, psi in enumerate(self.subformulas)}
        self.atoms = atoms(phi)

        for i in range(n + 1):
            self._register(self.model.add_continuous(f"g_{i}", 0.0, self.horizon), f"γ_{i}", self.registry.gamma)

        for v, (lo, hi) in self.variables.items():
            if math.isinf(lo) or math.isinf(hi) or lo > hi:
                raise EncodingError(f"trace variable '{v}' needs finite bounds, got [{lo}, {hi}]")
            column = self.registry.states.setdefault(v, [])
            for i in range(n + 1):
                self._register(self.model.add_continuous(f"x_{i}_{v}", lo, hi), f"x_{{{i},{v}}}", column)

        for p in sorted(magnitude_parameters(phi)):
            lo, hi = param_domains[p]
            var = self.model.add_continuous(f"p_{p}", lo, hi)
            self.registry.params[p] = var
            self.registry.symbols[var.name] = f"parameter {p}"

        for k, psi in enumerate(self.subformulas):
            column = self.registry.theta.setdefault(psi, [])
            for i in range(1, n + 1):
                self._register(self.model.add_binary(f"th_{k}_{i}"), f"⟨ψ{k}⟩_{i} for {psi.to_text()}", column)

    def _register(self, var: MilpVar, symbol: str, column: list[MilpVar] | None = None) -> MilpVar:
        self.registry.symbols[var.name] = symbol
        if column is not None:
            column.append(var)
        return var

    def gamma(self, i: int) -> MilpVar:
        return self.registry.gamma[i]

    def duration(self, i: int) -> LinExpr:
        """dᵢ = γᵢ − γᵢ₋₁."""
        return self.gamma(i) - self.gamma(i - 1)

    def theta(self, psi: Formula, i: int) -> MilpVar:
        """⟨ψ⟩ᵢ for i in [1, N + 1], with ⟨ψ⟩_{N+1} = ⟨ψ⟩_N."""
        return self.registry.theta[psi][min(i, self.n) - 1]

    def state(self, v: str, i: int) -> MilpVar:
        return self.registry.states[v][i]

    def param(self, name: str) -> MilpVar:
        return self.registry.params[name]

    def node_id(self, psi: Formula) -> int:
        return self.index[psi]

    def margin(self, predicate: LinearPredicate, i: int) -> LinExpr:
        """c⊤xᵢ + b (+ Σ k·p) at knot i."""
        expr = LinExpr(const=predicate.offset)
        for v, coeff in predicate.coeffs:
            expr = expr + coeff * self.state(v, i)
        for p, coeff in predicate.params:
            expr = expr + coeff * self.param(p)
        return expr

    def add_aux_binary(self, name: str, symbol: str = "") -> MilpVar:
        var = self.model.add_binary(name)
        self.registry.aux.append(var)
        self.registry.symbols[name] = symbol or name
        return var

    def add_aux_continuous(self, name: str, lower: float, upper: float, symbol: str = "") -> MilpVar:
        var = self.model.add_continuous(name, lower, upper)
        self.registry.aux.append(var)
        self.registry.symbols[name] = symbol or name
        return var

    def node_aux(self, psi: Formula, i: int, j: int, tag: str) -> MilpVar:
        """Fresh binary `aux_<node>_<i>_<j>_<tag>` belonging to subformula ψ."""
        k = self.node_id(psi)
        return self.add_aux_binary(f"aux_{k}_{i}_{j}_{tag}", f"auxiliary {tag} of ψ{k} at ({i}, {j})")

    def register_symbol(self, var: MilpVar, symbol: str) -> MilpVar:
        return self._register(var, symbol)


def _check_normalized(phi: Formula):
    for node in iter_nodes(phi):
        if isinstance(node, Not):
            raise EncodingError("formula must be in negation normal form; call normalize() first")
        if isinstance(node, (Until, Release)) and not node.interval.is_unbounded:
            raise EncodingError("bounded until / release must be rewritten; call normalize() first")
