"""Rectangular hybrid automata: box flows, box invariants, guarded transitions with box resets.

One mode per interval; a mode switch happens only at a knot γᵢ. Flows are boxes and motion inside an
interval is linear, so imposing invariants at both endpoints covers the whole interval.
"""

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from encoding.context import EncodingContext
from milp.model import LinExpr, MilpVar, Sense
from models.base_model import (
    Box,
    SystemModel,
    box_issues,
    box_to_dict,
    check_box_within,
    parse_box,
)
from signals.trace import PwlTrace
from utilities.exceptions import ModelValidationError

logger = logging.getLogger(__name__)


@dataclass
class Mode:
    name: str
    flow: Box = field(default_factory=dict)
    invariant: Box = field(default_factory=dict)


@dataclass
class Transition:
    source: str
    target: str
    guard: Box = field(default_factory=dict)
    post: Box = field(default_factory=dict)

    @property
    def updates(self) -> set[str]:
        return set(self.post)


@dataclass
class ModeStructure:
    """MILP variables of the discrete part: `modes[i][ℓ]` for interval i ∈ [1, N], `transitions[i][τ]`
    and `stay[i]` for knots i ∈ [1, N − 1], `post[i][v]` for updatable variables."""

    mode_names: list[str]
    modes: dict[int, list[MilpVar]]
    transitions: dict[int, list[MilpVar]]
    stay: dict[int, MilpVar]
    post: dict[int, dict[str, MilpVar]]

    def start(self, ctx: EncodingContext, v: str, i: int) -> MilpVar:
        """State at the beginning of interval i + 1: the post-reset copy of knot i when there is one."""
        return self.post.get(i, {}).get(v) or ctx.state(v, i)


def parse_modes(data: Mapping, where: str = "modes") -> list[Mode]:
    return [
        Mode(
            name,
            parse_box(body.get("flow"), f"{where}.{name}.flow"),
            parse_box(body.get("invariant"), f"{where}.{name}.invariant"),
        )
        for name, body in (data or {}).items()
    ]


def parse_transitions(data: Sequence[Mapping] | None) -> list[Transition]:
    transitions = []
    for index, body in enumerate(data or []):
        try:
            source, target = body["source"], body["target"]
        except KeyError as e:
            raise ModelValidationError(f"transitions[{index}] is missing '{e.args[0]}'") from None
        transitions.append(
            Transition(
                source,
                target,
                parse_box(body.get("guard"), f"transitions[{index}].guard"),
                parse_box(body.get("post"), f"transitions[{index}].post"),
            )
        )
    return transitions


def validate_mode_structure(
    modes: Sequence[Mode], transitions: Sequence[Transition], initial_modes: Sequence[str], bounds: Box
):
    if not modes:
        raise ModelValidationError("hybrid automaton has an empty mode set")
    names = [mode.name for mode in modes]
    if len(set(names)) != len(names):
        raise ModelValidationError(f"duplicate mode names in {names}")
    for mode in modes:
        for v in mode.flow:
            if v not in bounds:
                raise ModelValidationError(f"mode '{mode.name}' flow uses unknown variable '{v}'")
        check_box_within(mode.invariant, bounds, f"mode '{mode.name}' invariant")
    for index, transition in enumerate(transitions):
        for end in (transition.source, transition.target):
            if end not in names:
                raise ModelValidationError(f"transitions[{index}] refers to unknown mode '{end}'")
        check_box_within(transition.guard, bounds, f"transitions[{index}] guard")
        check_box_within(transition.post, bounds, f"transitions[{index}] post")
    if not initial_modes:
        raise ModelValidationError("hybrid automaton needs at least one initial mode")
    for name in initial_modes:
        if name not in names:
            raise ModelValidationError(f"unknown initial mode '{name}'")


def _add_box(ctx: EncodingContext, guard: MilpVar, box: Box, state, name: str):
    for v, (lo, hi) in box.items():
        if lo == hi:
            ctx.model.add_conditional(guard, 1, state(v), Sense.EQ, lo, f"{name}_{v}")
        else:
            ctx.model.add_conditional(guard, 1, state(v), Sense.GE, lo, f"{name}_{v}_lo")
            ctx.model.add_conditional(guard, 1, state(v), Sense.LE, hi, f"{name}_{v}_hi")


def encode_mode_structure(
    ctx: EncodingContext,
    modes: Sequence[Mode],
    transitions: Sequence[Transition],
    initial_modes: Sequence[str],
) -> ModeStructure:
    """Mode indicators, initial modes, transitions with guards and resets, and mode invariants at both
    endpoints of every interval."""
    model, n = ctx.model, ctx.n
    names = [mode.name for mode in modes]
    structure = ModeStructure(names, {}, {}, {}, {})

    for i in range(1, n + 1):
        column = []
        for index, mode in enumerate(modes):
            var = ctx.add_aux_binary(f"m_{i}_{index}", f"mode {mode.name} on interval {i}")
            column.append(var)
        structure.modes[i] = column
        model.add_constraint(LinExpr.sum(column), Sense.EQ, 1.0, f"mode_{i}")

    for index, mode in enumerate(modes):
        if mode.name not in initial_modes:
            model.add_constraint(structure.modes[1][index], Sense.EQ, 0.0, f"mode_init_{index}")

    updatable = sorted({v for transition in transitions for v in transition.updates})
    if updatable and n > 1:
        logger.warning(
            f"variables {updatable} can be reset; decoded traces show pre-reset values at switching knots"
        )

    for i in range(1, n):
        tr = [
            ctx.add_aux_binary(f"tr_{i}_{index}", f"transition {t.source}->{t.target} at knot {i}")
            for index, t in enumerate(transitions)
        ]
        stay = ctx.add_aux_binary(f"stay_{i}", f"no transition at knot {i}")
        structure.transitions[i] = tr
        structure.stay[i] = stay
        model.add_constraint(LinExpr.sum([*tr, stay]), Sense.EQ, 1.0, f"switch_{i}")
        for index, mode in enumerate(modes):
            here, after = structure.modes[i][index], structure.modes[i + 1][index]
            model.add_conditional(stay, 1, here - after, Sense.EQ, 0.0, f"stay_{i}_{index}")

        posts = {}
        for v in updatable:
            lo, hi = ctx.variables[v]
            posts[v] = model.add_continuous(f"xp_{i}_{v}", lo, hi)
            ctx.register_symbol(posts[v], f"post-reset x_{{{i},{v}}}")
            model.add_conditional(stay, 1, posts[v] - ctx.state(v, i), Sense.EQ, 0.0, f"keep_{i}_{v}")
        structure.post[i] = posts

        for index, transition in enumerate(transitions):
            var = tr[index]
            source, target = names.index(transition.source), names.index(transition.target)
            model.add_constraint(var - structure.modes[i][source], Sense.LE, 0.0, f"tr_{i}_{index}_src")
            model.add_constraint(var - structure.modes[i + 1][target], Sense.LE, 0.0, f"tr_{i}_{index}_tgt")
            _add_box(ctx, var, transition.guard, lambda v, i=i: ctx.state(v, i), f"guard_{i}_{index}")
            _add_box(ctx, var, transition.post, lambda v, posts=posts: posts[v], f"post_{i}_{index}")
            for v in updatable:
                if v not in transition.updates:
                    model.add_conditional(var, 1, posts[v] - ctx.state(v, i), Sense.EQ, 0.0, f"keep_{i}_{index}_{v}")

    for i in range(1, n + 1):
        for index, mode in enumerate(modes):
            active = structure.modes[i][index]
            _add_box(ctx, active, mode.invariant, lambda v, i=i: structure.start(ctx, v, i - 1), f"inv_{i}_{index}_s")
            _add_box(ctx, active, mode.invariant, lambda v, i=i: ctx.state(v, i), f"inv_{i}_{index}_e")
    return structure


def active_mode(values: Mapping[str, float], i: int, count: int) -> int:
    """Index of the mode whose indicator `m_<i>_<ℓ>` is set on interval i."""
    return max(range(count), key=lambda index: values.get(f"m_{i}_{index}", 0.0))


def start_state(state: Mapping[str, float], values: Mapping[str, float], i: int) -> dict[str, float]:
    """State at the beginning of interval i + 1, with post-reset values `xp_<i>_<v>` applied."""
    start = dict(state)
    for v in start:
        start[v] = values.get(f"xp_{i}_{v}", start[v])
    return start


def mode_sequence(mode_names: Sequence[str], values: Mapping[str, float], n: int) -> list[str]:
    return [mode_names[active_mode(values, i, len(mode_names))] for i in range(1, n + 1)]


class RectangularHybridAutomaton(SystemModel):
    kind = "rha"

    def __init__(
        self,
        name: str,
        variables: Box,
        modes: Sequence[Mode],
        transitions: Sequence[Transition],
        initial_modes: Sequence[str],
        initial: Box | None = None,
    ):
        super().__init__(name, variables, initial)
        self.modes = list(modes)
        self.transitions = list(transitions)
        self.initial_modes = list(initial_modes)

    @property
    def mode_names(self) -> list[str]:
        return [mode.name for mode in self.modes]

    def validate(self) -> "RectangularHybridAutomaton":
        super().validate()
        validate_mode_structure(self.modes, self.transitions, self.initial_modes, self.bounds)
        return self

    def encode(self, ctx: EncodingContext):
        self.encode_initial_box(ctx)
        structure = encode_mode_structure(ctx, self.modes, self.transitions, self.initial_modes)
        model = ctx.model
        for i in range(1, ctx.n + 1):
            d = ctx.duration(i)
            for index, mode in enumerate(self.modes):
                active = structure.modes[i][index]
                for v, (lo, hi) in mode.flow.items():
                    change = ctx.state(v, i) - structure.start(ctx, v, i - 1)
                    if lo == hi:
                        model.add_conditional(active, 1, change - lo * d, Sense.EQ, 0.0, f"flow_{i}_{index}_{v}")
                    else:
                        model.add_conditional(active, 1, change - lo * d, Sense.GE, 0.0, f"flow_{i}_{index}_{v}_lo")
                        model.add_conditional(active, 1, change - hi * d, Sense.LE, 0.0, f"flow_{i}_{index}_{v}_hi")

    def check_trace(self, trace: PwlTrace, values: Mapping[str, float], tolerance: float = 1e-6) -> list[str]:
        """Average slopes within the active flow box and invariants at both knots of every interval."""
        issues = super().check_trace(trace, values, tolerance)
        states = trace.states
        for i in range(1, len(states)):
            mode = self.modes[active_mode(values, i, len(self.modes))]
            d = float(trace.times[i] - trace.times[i - 1])
            start = start_state(states[i - 1], values, i - 1)
            for v, (lo, hi) in mode.flow.items():
                slope = (states[i][v] - start[v]) / d
                if slope < lo - tolerance or slope > hi + tolerance:
                    issues.append(f"interval {i} ({mode.name}): slope of {v} = {slope:g} outside [{lo:g}, {hi:g}]")
            issues.extend(box_issues(mode.invariant, start, tolerance, f"interval {i} start ({mode.name})"))
            issues.extend(box_issues(mode.invariant, states[i], tolerance, f"interval {i} end ({mode.name})"))
        return issues

    @classmethod
    def from_dict(cls, data: dict) -> "RectangularHybridAutomaton":
        initial_modes = data.get("initial_modes", [])
        if isinstance(initial_modes, str):
            initial_modes = [initial_modes]
        return cls(
            data.get("name", "rha"),
            parse_box(data.get("variables"), "variables"),
            parse_modes(data.get("modes")),
            parse_transitions(data.get("transitions")),
            initial_modes,
            parse_box(data.get("initial"), "initial"),
        )

    def to_dict(self) -> dict:
        data = super().to_dict()
        data["modes"] = {
            mode.name: {"flow": box_to_dict(mode.flow), "invariant": box_to_dict(mode.invariant)} for mode in self.modes
        }
        data["transitions"] = [
            {"source": t.source, "target": t.target, "guard": box_to_dict(t.guard), "post": box_to_dict(t.post)}
            for t in self.transitions
        ]
        data["initial_modes"] = list(self.initial_modes)
        return data
