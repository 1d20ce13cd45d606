"""Hybrid automata whose per-mode flows have a closed-form solution sampled at kΔt.

Each mode carries the table F_k(x₀, u) = A_k·x₀ + B_k·u + c_k of the solution after elapsed time kΔt
(linear in the initial state x₀ and the constant input u). Between samples the state is the linear
interpolation F_k + λ·(F_{k+1} − F_k), λ = (t − kΔt)/Δt. The solution restarts at every knot, so the
elapsed time on interval i is dᵢ; flows must therefore be time-invariant.
"""

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from encoding.context import EncodingContext
from encoding.linearization import add_binary_expansion, add_expanded_product, expression_bounds
from milp.model import LinExpr, MilpVar, Sense
from models.base_model import Box, SystemModel, box_issues, box_to_dict, parse_box
from models.rha import (
    Mode,
    Transition,
    active_mode,
    encode_mode_structure,
    parse_transitions,
    start_state,
    validate_mode_structure,
)
from signals.trace import PwlTrace
from utilities.exceptions import EncodingError, ModelValidationError

logger = logging.getLogger(__name__)


def interpolate_samples(values: Sequence[float], dt: float, t: float) -> float:
    """f(kΔt) + (t − kΔt)/Δt · (f((k+1)Δt) − f(kΔt)) for the k with kΔt ≤ t ≤ (k+1)Δt."""
    values = np.asarray(values, dtype=float)
    coverage = dt * (len(values) - 1)
    if t < 0 or t > coverage + 1e-12:
        raise EncodingError(f"elapsed time {t:g} is outside the sampled range [0, {coverage:g}]")
    return float(np.interp(t, dt * np.arange(len(values)), values))


@dataclass
class SampleMap:
    """x(kΔt) = A·x₀ + B·u + c."""

    A: np.ndarray
    B: np.ndarray
    c: np.ndarray

    def evaluate(self, x0: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.A @ x0 + self.B @ u + self.c


@dataclass
class ClosedFormMode:
    name: str
    samples: list[SampleMap]
    invariant: Box = field(default_factory=dict)

    @property
    def segments(self) -> int:
        return len(self.samples) - 1


def _matrix(value, rows: int, cols: int, where: str) -> np.ndarray:
    if value is None:
        return np.zeros((rows, cols))
    array = np.asarray(value, dtype=float)
    if array.shape != (rows, cols) or not np.all(np.isfinite(array)):
        raise ModelValidationError(f"{where}: expected a finite {rows}x{cols} matrix, got {value!r}")
    return array


def _vector(value, size: int, where: str) -> np.ndarray:
    if value is None:
        return np.zeros(size)
    array = np.asarray(value, dtype=float)
    if array.shape != (size,) or not np.all(np.isfinite(array)):
        raise ModelValidationError(f"{where}: expected {size} finite values, got {value!r}")
    return array


class ClosedFormHybridAutomaton(SystemModel):
    kind = "closed_form"

    def __init__(
        self,
        name: str,
        variables: Box,
        states: Sequence[str],
        inputs: Sequence[str],
        dt: float,
        modes: Sequence[ClosedFormMode],
        transitions: Sequence[Transition],
        initial_modes: Sequence[str],
        initial: Box | None = None,
    ):
        super().__init__(name, variables, initial)
        self.states = list(states)
        self.inputs = list(inputs)
        self.dt = float(dt)
        self.modes = list(modes)
        self.transitions = list(transitions)
        self.initial_modes = list(initial_modes)

    @property
    def coverage(self) -> float:
        """Longest elapsed time any mode's table reaches."""
        return self.dt * max(mode.segments for mode in self.modes)

    def _as_modes(self) -> list[Mode]:
        return [Mode(mode.name, {}, mode.invariant) for mode in self.modes]

    def validate(self) -> "ClosedFormHybridAutomaton":
        super().validate()
        if not self.dt > 0:
            raise ModelValidationError(f"sampling interval must be positive, got {self.dt}")
        if not self.states:
            raise ModelValidationError("closed-form automaton needs at least one state variable")
        for v in [*self.states, *self.inputs]:
            if v not in self.bounds:
                raise ModelValidationError(f"'{v}' is not a declared variable")
        if set(self.states) & set(self.inputs):
            both = sorted(set(self.states) & set(self.inputs))
            raise ModelValidationError(f"variables are both states and inputs: {both}")
        validate_mode_structure(self._as_modes(), self.transitions, self.initial_modes, self.bounds)
        n_states, n_inputs = len(self.states), len(self.inputs)
        for mode in self.modes:
            if mode.segments < 1:
                raise ModelValidationError(f"mode '{mode.name}' needs at least two samples")
            first = mode.samples[0]
            if (
                not np.allclose(first.A, np.eye(n_states))
                or not np.allclose(first.B, np.zeros((n_states, n_inputs)))
                or not np.allclose(first.c, 0.0)
            ):
                raise ModelValidationError(f"mode '{mode.name}': the sample at elapsed time 0 must be the identity map")
        return self

    def _sample_exprs(self, sample: SampleMap, x0: Mapping[str, MilpVar], u: Mapping[str, MilpVar]) -> list[LinExpr]:
        exprs = []
        for row, _ in enumerate(self.states):
            expr = LinExpr(const=float(sample.c[row]))
            for col, v in enumerate(self.states):
                expr = expr + float(sample.A[row, col]) * x0[v]
            for col, v in enumerate(self.inputs):
                expr = expr + float(sample.B[row, col]) * u[v]
            exprs.append(expr)
        return exprs

    def encode(self, ctx: EncodingContext):
        model, n, dt = ctx.model, ctx.n, self.dt
        beta = ctx.config.beta
        if n * self.coverage < ctx.horizon:
            raise EncodingError(
                f"N={n} intervals of at most {self.coverage:g} time units cannot cover the horizon {ctx.horizon:g}"
            )
        self.encode_initial_box(ctx)
        structure = encode_mode_structure(ctx, self._as_modes(), self.transitions, self.initial_modes)
        for v in self.inputs:
            model.add_constraint(ctx.state(v, 0) - ctx.state(v, 1), Sense.EQ, 0.0, f"input_0_{v}")

        for i in range(1, n + 1):
            d = ctx.duration(i)
            model.add_constraint(d, Sense.LE, self.coverage, f"cover_{i}")
            lam = ctx.add_aux_continuous(f"lam_{i}", 0.0, 1.0, f"position within the sampled segment on interval {i}")
            expansion = add_binary_expansion(model, f"lb_{i}", lam, 1.0, beta)
            x0 = {v: structure.start(ctx, v, i - 1) for v in self.states}
            u = {v: ctx.state(v, i) for v in self.inputs}

            # (selector, F_k rows, F_{k+1} − F_k rows) per mode and segment
            segments: list[tuple[MilpVar, list[LinExpr], list[LinExpr]]] = []
            for index, mode in enumerate(self.modes):
                selectors = []
                for k in range(mode.segments):
                    s = ctx.add_aux_binary(f"sel_{i}_{index}_{k}", f"segment {k} of mode {mode.name} on interval {i}")
                    selectors.append(s)
                    model.add_conditional(s, 1, lam * dt - d, Sense.EQ, -k * dt, f"seg_{i}_{index}_{k}")
                    here = self._sample_exprs(mode.samples[k], x0, u)
                    after = self._sample_exprs(mode.samples[k + 1], x0, u)
                    segments.append((s, here, [b - a for a, b in zip(here, after, strict=True)]))
                model.add_constraint(
                    LinExpr.sum(selectors) - structure.modes[i][index], Sense.EQ, 0.0, f"sel_{i}_{index}"
                )

            for row, w in enumerate(self.states):
                ranges = [expression_bounds(model, slope[row]) for _, _, slope in segments]
                lo, hi = min(r[0] for r in ranges), max(r[1] for r in ranges)
                h = model.add_continuous(f"h_{i}_{w}", lo, hi)
                ctx.register_symbol(h, f"segment increment of {w} on interval {i}")
                for s, _, slope in segments:
                    model.add_conditional(s, 1, h - slope[row], Sense.EQ, 0.0)
                q = add_expanded_product(model, f"q_{i}_{w}", expansion, h)
                for s, here, _ in segments:
                    model.add_conditional(s, 1, ctx.state(w, i) - here[row] - q, Sense.EQ, 0.0)

    def check_trace(self, trace: PwlTrace, values: Mapping[str, float], tolerance: float = 1e-6) -> list[str]:
        """Segment choice consistent with dᵢ, interpolation identity with the encoded λ, invariants."""
        issues = super().check_trace(trace, values, tolerance)
        states = trace.states
        for i in range(1, len(states)):
            index = active_mode(values, i, len(self.modes))
            mode = self.modes[index]
            d = float(trace.times[i] - trace.times[i - 1])
            k = int(np.argmax([values.get(f"sel_{i}_{index}_{seg}", 0.0) for seg in range(mode.segments)]))
            if f"lam_{i}" not in values:
                issues.append(f"interval {i}: the solution has no lam_{i}")
                continue
            lam = values[f"lam_{i}"]
            encoded = lam - values.get(f"lb_{i}_r", 0.0)
            if abs(lam * self.dt - (d - k * self.dt)) > tolerance * max(1.0, d):
                issues.append(f"interval {i}: segment {k} does not contain the elapsed time {d:g}")
            start = start_state(states[i - 1], values, i - 1)
            x0 = np.array([start[v] for v in self.states])
            u = np.array([states[i][v] for v in self.inputs])
            here = mode.samples[k].evaluate(x0, u)
            after = mode.samples[k + 1].evaluate(x0, u)
            expected = here + encoded * (after - here)
            for row, w in enumerate(self.states):
                gap = states[i][w] - expected[row]
                if abs(gap) > tolerance * max(1.0, abs(expected[row])):
                    issues.append(f"interval {i} ({mode.name}): {w} misses the sampled solution by {gap:g}")
            issues.extend(box_issues(mode.invariant, start, tolerance, f"interval {i} start ({mode.name})"))
            issues.extend(box_issues(mode.invariant, states[i], tolerance, f"interval {i} end ({mode.name})"))
        return issues

    @classmethod
    def from_dict(cls, data: dict) -> "ClosedFormHybridAutomaton":
        states = list(data.get("states", []))
        inputs = list(data.get("inputs", []))
        modes = []
        for name, body in (data.get("modes") or {}).items():
            samples = []
            for k, sample in enumerate(body.get("samples", [])):
                where = f"modes.{name}.samples[{k}]"
                if sample is None:
                    raise ModelValidationError(f"{where}: gap in the sample table")
                samples.append(
                    SampleMap(
                        _matrix(sample.get("A"), len(states), len(states), f"{where}.A"),
                        _matrix(sample.get("B"), len(states), len(inputs), f"{where}.B"),
                        _vector(sample.get("c"), len(states), f"{where}.c"),
                    )
                )
            modes.append(ClosedFormMode(name, samples, parse_box(body.get("invariant"), f"modes.{name}.invariant")))
        initial_modes = data.get("initial_modes", [])
        if isinstance(initial_modes, str):
            initial_modes = [initial_modes]
        return cls(
            data.get("name", "closed_form"),
            parse_box(data.get("variables"), "variables"),
            states,
            inputs,
            data.get("dt", 1.0),
            modes,
            parse_transitions(data.get("transitions")),
            initial_modes,
            parse_box(data.get("initial"), "initial"),
        )

    def to_dict(self) -> dict:
        data = super().to_dict()
        data.update(
            {
                "states": self.states,
                "inputs": self.inputs,
                "dt": self.dt,
                "modes": {
                    mode.name: {
                        "samples": [{"A": s.A.tolist(), "B": s.B.tolist(), "c": s.c.tolist()} for s in mode.samples],
                        "invariant": box_to_dict(mode.invariant),
                    }
                    for mode in self.modes
                },
                "transitions": [
                    {"source": t.source, "target": t.target, "guard": box_to_dict(t.guard), "post": box_to_dict(t.post)}
                    for t in self.transitions
                ],
                "initial_modes": self.initial_modes,
            }
        )
        return data
