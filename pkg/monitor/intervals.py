"""Interval sets over the time axis with exact open/closed endpoint bookkeeping."""

import math
from dataclasses import dataclass
from typing import Iterable, Iterator


@dataclass(frozen=True)
class TimeInterval:
    lo: float
    lo_closed: bool
    hi: float
    hi_closed: bool

    def __post_init__(self):
        # Infinite endpoints are never attained.
        if math.isinf(self.lo) and self.lo_closed:
            object.__setattr__(self, "lo_closed", False)
        if math.isinf(self.hi) and self.hi_closed:
            object.__setattr__(self, "hi_closed", False)

    @classmethod
    def closed(cls, lo: float, hi: float) -> "TimeInterval":
        return cls(lo, True, hi, True)

    @classmethod
    def point(cls, t: float) -> "TimeInterval":
        return cls(t, True, t, True)

    @property
    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def contains(self, t: float, tolerance: float = 0.0) -> bool:
        if tolerance > 0:
            return self.lo - tolerance <= t <= self.hi + tolerance
        above = t > self.lo or (t == self.lo and self.lo_closed)
        below = t < self.hi or (t == self.hi and self.hi_closed)
        return above and below

    def intersect(self, other: "TimeInterval") -> "TimeInterval":
        if self.lo > other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        return TimeInterval(lo, lo_closed, hi, hi_closed)

    def shifted_back(self, a: float, b: float) -> "TimeInterval":
        """{t : (t + [a, b]) ∩ self ≠ ∅}."""
        return TimeInterval(self.lo - b, self.lo_closed, self.hi - a, self.hi_closed)

    def to_text(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo:g}, {self.hi:g}{right}"


def _touches(left: TimeInterval, right: TimeInterval) -> bool:
    """`right` starts before `left` ends, or they meet at a point covered by one of them."""
    return right.lo < left.hi or (right.lo == left.hi and (left.hi_closed or right.lo_closed))


def _normalize(intervals: Iterable[TimeInterval]) -> tuple[TimeInterval, ...]:
    items = sorted((i for i in intervals if not i.is_empty), key=lambda i: (i.lo, not i.lo_closed))
    merged: list[TimeInterval] = []
    for interval in items:
        if merged and _touches(merged[-1], interval):
            last = merged[-1]
            if interval.hi > last.hi:
                hi, hi_closed = interval.hi, interval.hi_closed
            elif interval.hi < last.hi:
                hi, hi_closed = last.hi, last.hi_closed
            else:
                hi, hi_closed = last.hi, last.hi_closed or interval.hi_closed
            merged[-1] = TimeInterval(last.lo, last.lo_closed, hi, hi_closed)
        else:
            merged.append(interval)
    return tuple(merged)


class TruthIntervalSet:
    """A finite union of intervals, kept sorted, disjoint and non-adjacent."""

    def __init__(self, intervals: Iterable[TimeInterval] = ()):
        self.intervals = _normalize(intervals)

    @classmethod
    def empty(cls) -> "TruthIntervalSet":
        return cls()

    @classmethod
    def from_closed(cls, pairs: Iterable[tuple[float, float]]) -> "TruthIntervalSet":
        return cls(TimeInterval.closed(lo, hi) for lo, hi in pairs)

    @classmethod
    def nonnegative(cls) -> "TruthIntervalSet":
        return cls([TimeInterval(0.0, True, math.inf, False)])

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def __iter__(self) -> Iterator[TimeInterval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, TruthIntervalSet) and self.intervals == other.intervals

    def __repr__(self) -> str:
        return "TruthIntervalSet(" + " ∪ ".join(i.to_text() for i in self.intervals) + ")"

    def union(self, other: "TruthIntervalSet") -> "TruthIntervalSet":
        return TruthIntervalSet(self.intervals + other.intervals)

    def intersection(self, other: "TruthIntervalSet") -> "TruthIntervalSet":
        result = []
        for left in self.intervals:
            for right in other.intervals:
                if right.lo > left.hi:
                    break
                piece = left.intersect(right)
                if not piece.is_empty:
                    result.append(piece)
        return TruthIntervalSet(result)

    def clip(self, lo: float, hi: float) -> "TruthIntervalSet":
        window = TimeInterval.closed(lo, hi)
        return TruthIntervalSet(i.intersect(window) for i in self.intervals)

    def complement(self) -> "TruthIntervalSet":
        """Complement within [0, ∞)."""
        gaps = []
        cursor, cursor_closed = 0.0, True
        for interval in self.clip(0.0, math.inf).intervals:
            gaps.append(TimeInterval(cursor, cursor_closed, interval.lo, not interval.lo_closed))
            cursor, cursor_closed = interval.hi, not interval.hi_closed
        if not math.isinf(cursor):
            gaps.append(TimeInterval(cursor, cursor_closed, math.inf, False))
        return TruthIntervalSet(gaps)

    def shifted_back(self, a: float, b: float) -> "TruthIntervalSet":
        """Minkowski difference with [a, b]: every t whose window t + [a, b] meets the set."""
        return TruthIntervalSet(i.shifted_back(a, b) for i in self.intervals)

    def contains(self, t: float, tolerance: float = 0.0) -> bool:
        return any(i.contains(t, tolerance) for i in self.intervals)

    def contains_interval(self, lo: float, hi: float, tolerance: float = 0.0) -> bool:
        """[lo, hi] ⊆ set. With a tolerance, gaps and overhangs shorter than it are ignored."""
        if tolerance <= 0:
            target = TimeInterval.closed(lo, hi)
            return any(i.intersect(target) == target for i in self.intervals)
        cursor = lo
        for interval in self.intervals:
            if interval.hi < cursor - tolerance:
                continue
            if interval.lo > cursor + tolerance:
                return False
            cursor = max(cursor, interval.hi)
            if cursor >= hi - tolerance:
                return True
        return False

    def intersects_interval(self, lo: float, hi: float, tolerance: float = 0.0) -> bool:
        """Set ∩ [lo, hi] ≠ ∅. With a tolerance, only overlaps longer than it count."""
        target = TimeInterval.closed(lo, hi)
        for interval in self.intervals:
            piece = interval.intersect(target)
            if piece.is_empty:
                continue
            if tolerance <= 0 or piece.hi - piece.lo > tolerance:
                return True
        return False

    def to_list(self) -> list[dict]:
        return [
            {"lo": i.lo, "lo_closed": i.lo_closed, "hi": i.hi, "hi_closed": i.hi_closed} for i in self.intervals
        ]
