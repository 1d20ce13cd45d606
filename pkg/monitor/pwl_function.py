import math
from typing import Iterable

import numpy as np

from signals.trace import TOLERANCE


class PwlFunction:
    """A continuous piecewise-linear function on [0, T], constant after T.

    Constant functions may take the values ±∞ (the robustness of ⊤ and ⊥); every other function is finite.
    """

    def __init__(self, times: Iterable[float], values: Iterable[float]):
        self.times = np.asarray(list(times), dtype=float)
        self.values = np.asarray(list(values), dtype=float)
        if self.times.shape != self.values.shape or len(self.times) < 2:
            raise ValueError("a piecewise-linear function needs matching times and values, at least two of each")
        infinite = np.isinf(self.values)
        if infinite.any() and not (infinite.all() and np.all(self.values == self.values[0])):
            raise ValueError("only constant functions may be infinite")

    @classmethod
    def constant(cls, value: float, horizon: float) -> "PwlFunction":
        return cls([0.0, horizon], [value, value])

    @classmethod
    def from_samples(cls, samples: Iterable[tuple[float, float]], horizon: float) -> "PwlFunction":
        """Sort (t, value) samples and merge times closer than the comparison tolerance."""
        times, values = [], []
        for t, v in sorted(samples):
            if times and t - times[-1] <= TOLERANCE:
                continue
            times.append(t)
            values.append(v)
        if len(times) == 1:
            times.append(horizon)
            values.append(values[0])
        return cls(times, values)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    @property
    def constant_value(self) -> float | None:
        return float(self.values[0]) if self.is_constant else None

    def value_at(self, t: float) -> float:
        if self.is_constant:
            return float(self.values[0])
        return float(np.interp(t, self.times, self.values))

    def values_at(self, ts: np.ndarray) -> np.ndarray:
        if self.is_constant:
            return np.full(np.shape(ts), self.values[0])
        return np.interp(ts, self.times, self.values)

    def __neg__(self) -> "PwlFunction":
        return PwlFunction(self.times, -self.values)

    def _combine(self, other: "PwlFunction", pick) -> "PwlFunction":
        horizon = max(self.horizon, other.horizon)
        mine, theirs = self.constant_value, other.constant_value
        for value, function in ((mine, other), (theirs, self)):
            if value is not None and math.isinf(value):
                # ±∞ either absorbs or is neutral
                absorbing = pick(value, 0.0) == value
                return PwlFunction.constant(value, horizon) if absorbing else function

        grid = np.union1d(self.times, other.times)
        f, g = self.values_at(grid), other.values_at(grid)
        diff = f - g
        samples = list(zip(grid, pick(f, g), strict=True))
        for k in range(len(grid) - 1):
            if diff[k] * diff[k + 1] < 0:
                t = grid[k] + (grid[k + 1] - grid[k]) * diff[k] / (diff[k] - diff[k + 1])
                samples.append((t, self.value_at(t)))
        return PwlFunction.from_samples(samples, horizon)

    def minimum(self, other: "PwlFunction") -> "PwlFunction":
        return self._combine(other, np.minimum)

    def maximum(self, other: "PwlFunction") -> "PwlFunction":
        return self._combine(other, np.maximum)

    def __repr__(self) -> str:
        return f"PwlFunction(knots={len(self.times)}, T={self.horizon})"


def _linear_crossing(t0: float, t1: float, d0: float, d1: float) -> float | None:
    """Zero of the linear function with values d0 at t0 and d1 at t1, if strictly inside."""
    if d0 * d1 < 0:
        return t0 + (t1 - t0) * d0 / (d0 - d1)
    return None


def window_max(f: PwlFunction, a: float, b: float) -> PwlFunction:
    """g(t) = max_{s ∈ [t+a, t+b]} f(s), exact. b = ∞ is allowed (f is constant after T)."""
    if f.is_constant:
        return f
    horizon = f.horizon
    if math.isinf(b):
        b = a + horizon
    knots = f.times

    grid = np.concatenate(([0.0, horizon], knots - a, knots - b))
    grid = np.unique(grid[(grid >= 0) & (grid <= horizon)])

    samples = []
    for c0, c1 in zip(grid[:-1], grid[1:], strict=True):
        mid = 0.5 * (c0 + c1)
        inside = knots[(knots > mid + a) & (knots < mid + b)]
        interior = float(f.values_at(inside).max()) if inside.size else -math.inf

        u0, u1 = f.value_at(c0 + a), f.value_at(c1 + a)
        v0, v1 = f.value_at(c0 + b), f.value_at(c1 + b)
        candidates = [c0, c1]
        for crossing in (
            _linear_crossing(c0, c1, u0 - v0, u1 - v1),
            _linear_crossing(c0, c1, u0 - interior, u1 - interior) if inside.size else None,
            _linear_crossing(c0, c1, v0 - interior, v1 - interior) if inside.size else None,
        ):
            if crossing is not None:
                candidates.append(crossing)
        for t in candidates:
            samples.append((t, max(f.value_at(t + a), f.value_at(t + b), interior)))
    return PwlFunction.from_samples(samples, horizon)


def window_min(f: PwlFunction, a: float, b: float) -> PwlFunction:
    return -window_max(-f, a, b)


def _suffix_min_max(f1: PwlFunction, f2: PwlFunction, t: float, end: float, kink: float | None) -> float:
    """max over s in [t, end] of min(f1(s), f2(s)), for inputs linear on the cell (concave minimum)."""
    points = [t, end] + ([kink] if kink is not None and kink > t else [])
    return max(min(f1.value_at(s), f2.value_at(s)) for s in points)


def until_unbounded(f1: PwlFunction, f2: PwlFunction) -> PwlFunction:
    """Robustness of ψ₁ U ψ₂ over [0, ∞):

        g(t) = sup_{s ≥ t} min(f2(s), inf_{u ∈ [t, s)} f1(u))

    computed as max(f2, W) with W(t) = sup_{s ≥ t} min(f2(s), min_{[t, s]} f1), W(T) = min(f1(T), f2(T)),
    by a backward pass over the cells where both inputs are linear.
    """
    horizon = max(f1.horizon, f2.horizon)
    c1, c2 = f1.constant_value, f2.constant_value
    if c2 is not None and math.isinf(c2):
        return f2
    if c1 is not None and math.isinf(c1):
        return window_max(f2, 0.0, math.inf) if c1 > 0 else f2

    grid = np.union1d(f1.times, f2.times)
    later = min(f1.value_at(horizon), f2.value_at(horizon))
    samples = [(float(grid[-1]), later)]
    for k in range(len(grid) - 2, -1, -1):
        t0, t1 = float(grid[k]), float(grid[k + 1])
        p0, p1 = f1.value_at(t0), f1.value_at(t1)
        q0, q1 = f2.value_at(t0), f2.value_at(t1)
        carry = min(p1, later)

        kink = _linear_crossing(t0, t1, p0 - q0, p1 - q1)

        peak = _suffix_min_max(f1, f2, t0, t1, kink)
        candidates = [t0, t1] + ([kink] if kink is not None else [])
        for level in (carry, peak):
            for d0, d1 in ((p0 - level, p1 - level), (q0 - level, q1 - level)):
                crossing = _linear_crossing(t0, t1, d0, d1)
                if crossing is not None:
                    candidates.append(crossing)
        for t in candidates:
            samples.append((t, min(f1.value_at(t), max(_suffix_min_max(f1, f2, t, t1, kink), carry))))
        later = min(f1.value_at(t0), max(peak, carry))

    return f2.maximum(PwlFunction.from_samples(samples, horizon))
