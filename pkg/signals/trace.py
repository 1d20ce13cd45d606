"""Timed state sequences and the piecewise-linear signals they induce."""

from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from formula.ast import LinearPredicate
from utilities.config import DEFAULT_DELTA
from utilities.exceptions import TraceError

# Comparison tolerance for exact crossing arithmetic. Orders of magnitude below ε and δ.
TOLERANCE = 1e-9


class TimedStateSequence:
    """((x₀, γ₀), …, (x_N, γ_N)) with 0 = γ₀ < γ₁ < … < γ_N."""

    def __init__(self, times: Sequence[float], states: Sequence[Mapping[str, float]]):
        if len(times) != len(states):
            raise TraceError(f"{len(times)} times but {len(states)} states")
        if len(times) < 2:
            raise TraceError("a timed state sequence needs at least two points")
        times = np.asarray(times, dtype=float)
        if times[0] != 0:
            raise TraceError(f"first time must be 0, got {times[0]}")
        steps = np.diff(times)
        if np.any(steps <= 0):
            index = int(np.argmax(steps <= 0)) + 1
            raise TraceError(f"times must be strictly increasing (time {index} is {times[index]})")
        if not np.all(np.isfinite(times)):
            raise TraceError("times must be finite")

        self.variables: tuple[str, ...] = tuple(states[0].keys())
        for index, state in enumerate(states):
            if set(state) != set(self.variables):
                raise TraceError(f"state {index} has variables {sorted(state)}, expected {sorted(self.variables)}")
        values = np.array([[float(state[v]) for v in self.variables] for state in states], dtype=float)
        if not np.all(np.isfinite(values)):
            raise TraceError("state values must be finite")

        self.times = times
        self.values = values
        self.times.flags.writeable = False
        self.values.flags.writeable = False

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def num_intervals(self) -> int:
        return len(self.times) - 1

    def state(self, index: int) -> dict[str, float]:
        return {v: float(x) for v, x in zip(self.variables, self.values[index], strict=True)}

    @property
    def states(self) -> list[dict[str, float]]:
        return [self.state(i) for i in range(len(self.times))]

    def __len__(self) -> int:
        return len(self.times)


class PwlTrace:
    """The continuous signal obtained by linear interpolation between knots, held constant after T."""

    def __init__(self, base: TimedStateSequence):
        self.base = base

    @classmethod
    def from_points(cls, times: Sequence[float], states: Sequence[Mapping[str, float]]) -> "PwlTrace":
        return cls(TimedStateSequence(times, states))

    @classmethod
    def from_columns(cls, times: Iterable[float], columns: Mapping[str, Iterable[float]]) -> "PwlTrace":
        times = [float(t) for t in times]
        arrays = {name: [float(x) for x in values] for name, values in columns.items()}
        for name, values in arrays.items():
            if len(values) != len(times):
                raise TraceError(f"column '{name}' has {len(values)} values for {len(times)} times")
        states = [{name: values[i] for name, values in arrays.items()} for i in range(len(times))]
        return cls.from_points(times, states)

    @property
    def times(self) -> np.ndarray:
        return self.base.times

    @property
    def variables(self) -> tuple[str, ...]:
        return self.base.variables

    @property
    def horizon(self) -> float:
        return self.base.horizon

    @property
    def states(self) -> list[dict[str, float]]:
        """Knot states, one dict per knot."""
        return self.base.states

    def knot_values(self, variable: str) -> np.ndarray:
        try:
            return self.base.values[:, self.variables.index(variable)]
        except ValueError:
            raise TraceError(f"trace has no variable '{variable}'") from None

    def value_at(self, t: float) -> dict[str, float]:
        if t < 0:
            raise TraceError(f"signals are defined for t >= 0, got {t}")
        return {v: float(np.interp(t, self.times, self.base.values[:, k])) for k, v in enumerate(self.variables)}

    def values_at(self, ts: np.ndarray) -> dict[str, np.ndarray]:
        ts = np.asarray(ts, dtype=float)
        return {v: np.interp(ts, self.times, self.base.values[:, k]) for k, v in enumerate(self.variables)}

    def margins(self, predicate: LinearPredicate) -> np.ndarray:
        """π_p at every knot."""
        if predicate.params:
            raise TraceError(f"predicate {predicate} still has parameters; instantiate it before evaluation")
        result = np.full(len(self.times), predicate.offset)
        for name, coeff in predicate.coeffs:
            result = result + coeff * self.knot_values(name)
        return result

    def margin_at(self, predicate: LinearPredicate, t: float) -> float:
        return float(np.interp(t, self.times, self.margins(predicate)))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.base.values, columns=list(self.variables))
        frame.insert(0, "time", self.times)
        return frame

    def __repr__(self) -> str:
        return f"PwlTrace(N={self.base.num_intervals}, T={self.horizon}, variables={list(self.variables)})"


def predicate_margin(predicate: LinearPredicate, state: Mapping[str, float]) -> float:
    """π_p(x) = c⊤x + b."""
    missing = [name for name in predicate.variables if name not in state]
    if missing:
        raise TraceError(f"state does not assign {', '.join(missing)}")
    return predicate.margin(state)


def crossing_times(
    predicate: LinearPredicate, trace: PwlTrace, levels: Sequence[float] = (0.0, DEFAULT_DELTA)
) -> list[float]:
    """Times in (0, T) where π_p(σ(t)) equals one of `levels`, solved exactly per segment.

    Segments on which the margin is constant produce no crossing.
    """
    margins = trace.margins(predicate)
    t0, t1 = trace.times[:-1], trace.times[1:]
    m0, m1 = margins[:-1], margins[1:]
    slope = m1 - m0
    moving = np.abs(slope) > TOLERANCE

    roots = []
    for level in levels:
        fraction = np.divide(level - m0, slope, out=np.full_like(m0, np.nan), where=moving)
        hit = moving & (fraction >= -TOLERANCE) & (fraction <= 1 + TOLERANCE)
        roots.append(t0[hit] + np.clip(fraction[hit], 0.0, 1.0) * (t1 - t0)[hit])

    found = np.sort(np.concatenate(roots)) if roots else np.array([])
    found = found[(found > TOLERANCE) & (found < trace.horizon - TOLERANCE)]
    if found.size == 0:
        return []
    keep = np.concatenate([[True], np.diff(found) > TOLERANCE])
    return [float(t) for t in found[keep]]
