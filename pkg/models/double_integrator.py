"""Agents with ẋ = v, v̇ = a and a constant acceleration per interval.

vᵢ = vᵢ₋₁ + aᵢ·dᵢ and xᵢ = xᵢ₋₁ + dᵢ·(vᵢ₋₁ + vᵢ)/2 (trapezoidal rule, exact for linear v). The bilinear
terms are linearized by expanding dᵢ over the grid T / (2^β − 1); the residual below one grid step is
what the encoding gives up.
"""

import logging
from dataclasses import dataclass, field
from typing import Mapping

from encoding.context import EncodingContext
from encoding.linearization import add_binary_expansion, add_expanded_product
from milp.model import Sense
from models.base_model import Box, SystemModel, box_to_dict, parse_box, parse_range
from signals.trace import PwlTrace
from utilities.exceptions import ModelValidationError

logger = logging.getLogger(__name__)


@dataclass
class Agent:
    name: str
    position: str
    velocity: str
    acceleration: str
    position_bounds: tuple[float, float]
    velocity_bounds: tuple[float, float]
    acceleration_bounds: tuple[float, float]
    initial: Box = field(default_factory=dict)

    @property
    def bounds(self) -> Box:
        return {
            self.position: self.position_bounds,
            self.velocity: self.velocity_bounds,
            self.acceleration: self.acceleration_bounds,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Agent":
        name = data.get("name", "agent")
        try:
            return cls(
                name,
                data.get("position", f"x{name}"),
                data.get("velocity", f"v{name}"),
                data.get("acceleration", f"a{name}"),
                parse_range(data["position_bounds"], f"agents.{name}.position_bounds"),
                parse_range(data["velocity_bounds"], f"agents.{name}.velocity_bounds"),
                parse_range(data["acceleration_bounds"], f"agents.{name}.acceleration_bounds"),
                parse_box(data.get("initial"), f"agents.{name}.initial"),
            )
        except KeyError as e:
            raise ModelValidationError(f"agent '{name}' is missing '{e.args[0]}'") from None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "position": self.position,
            "velocity": self.velocity,
            "acceleration": self.acceleration,
            "position_bounds": list(self.position_bounds),
            "velocity_bounds": list(self.velocity_bounds),
            "acceleration_bounds": list(self.acceleration_bounds),
            "initial": box_to_dict(self.initial),
        }


class DoubleIntegratorModel(SystemModel):
    kind = "double_integrator"

    def __init__(self, name: str, agents: list[Agent], horizon: float | None = None, beta: int | None = None):
        bounds: Box = {}
        initial: Box = {}
        for agent in agents:
            bounds.update(agent.bounds)
            initial.update(agent.initial)
        super().__init__(name, bounds, initial)
        self.agents = agents
        self.horizon = horizon
        self.beta = beta

    def validate(self) -> "DoubleIntegratorModel":
        if not self.agents:
            raise ModelValidationError(f"model '{self.name}' has no agents")
        names = [v for agent in self.agents for v in agent.bounds]
        if len(set(names)) != len(names):
            raise ModelValidationError(f"agents share variable names: {names}")
        super().validate()
        for agent in self.agents:
            check = {agent.velocity, agent.position, agent.acceleration}
            unknown = set(agent.initial) - check
            if unknown:
                raise ModelValidationError(f"agent '{agent.name}' initial box names foreign variables {sorted(unknown)}")
        return self

    def step(self, horizon: float, beta: int) -> float:
        return horizon / (2**beta - 1)

    def encode(self, ctx: EncodingContext):
        model = ctx.model
        beta = self.beta or ctx.config.beta
        step = self.step(ctx.horizon, beta)
        for agent in self.agents:
            v_lo, v_hi = agent.velocity_bounds
            x_lo, x_hi = agent.position_bounds
            error = step * max(abs(v_lo), abs(v_hi))
            if error > 0.1 * (x_hi - x_lo):
                logger.warning(
                    f"β={beta} gives a per-interval position error up to {error:g} for agent '{agent.name}'; "
                    f"increase β for more precision"
                )

        self.encode_initial_box(ctx)
        for i in range(1, ctx.n + 1):
            expansion = add_binary_expansion(model, f"db_{i}", ctx.duration(i), ctx.horizon, beta)
            for k, agent in enumerate(self.agents):
                x_prev, x = ctx.state(agent.position, i - 1), ctx.state(agent.position, i)
                v_prev, v = ctx.state(agent.velocity, i - 1), ctx.state(agent.velocity, i)
                a = ctx.state(agent.acceleration, i)
                dv = add_expanded_product(model, f"dv_{i}_{k}", expansion, a)
                model.add_constraint(v - v_prev - dv, Sense.EQ, 0.0, f"vel_{i}_{k}")
                dx = add_expanded_product(model, f"dx_{i}_{k}", expansion, v_prev + v)
                model.add_constraint(x - x_prev - 0.5 * dx, Sense.EQ, 0.0, f"pos_{i}_{k}")
        for k, agent in enumerate(self.agents):
            a0, a1 = ctx.state(agent.acceleration, 0), ctx.state(agent.acceleration, 1)
            model.add_constraint(a0 - a1, Sense.EQ, 0.0, f"acc_0_{k}")

    def check_trace(self, trace: PwlTrace, values: Mapping[str, float], tolerance: float = 1e-6) -> list[str]:
        """Trapezoid identities with the encoded duration dᵢ − rᵢ, rᵢ the expansion residual."""
        issues = super().check_trace(trace, values, tolerance)
        states = trace.states
        for i in range(1, len(states)):
            d = float(trace.times[i] - trace.times[i - 1]) - values.get(f"db_{i}_r", 0.0)
            before, after = states[i - 1], states[i]
            for agent in self.agents:
                a = after[agent.acceleration]
                v_prev, v = before[agent.velocity], after[agent.velocity]
                dv = v - v_prev - a * d
                dx = after[agent.position] - before[agent.position] - d * (v_prev + v) / 2
                scale = max(1.0, abs(v), abs(after[agent.position]))
                if abs(dv) > tolerance * scale:
                    issues.append(f"interval {i}: {agent.velocity} misses vᵢ₋₁ + a·d by {dv:g}")
                if abs(dx) > tolerance * scale:
                    issues.append(f"interval {i}: {agent.position} misses the trapezoid step by {dx:g}")
        return issues

    @classmethod
    def from_dict(cls, data: dict) -> "DoubleIntegratorModel":
        agents = [Agent.from_dict(body) for body in data.get("agents", [])]
        horizon = data.get("horizon")
        return cls(data.get("name", "double_integrator"), agents, horizon, data.get("beta"))

    def to_dict(self) -> dict:
        data = {"kind": self.kind, "name": self.name, "agents": [agent.to_dict() for agent in self.agents]}
        if self.horizon is not None:
            data["horizon"] = self.horizon
        if self.beta is not None:
            data["beta"] = self.beta
        return data
