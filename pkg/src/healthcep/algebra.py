"""Event operators over interval sets: AND, OR, NOT and DELAY.

NOT is a complement inside an explicit evaluation window; DELAY shifts every
interval forward and clips the result to the window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import IntervalSet, TimeLike, Timestamp, to_timestamp


@dataclass(frozen=True)
class Window:
    start: Timestamp
    end: Timestamp

    def __post_init__(self):
        object.__setattr__(self, "start", to_timestamp(self.start))
        object.__setattr__(self, "end", to_timestamp(self.end))
        if self.start >= self.end:
            raise ValueError(f"empty window [{self.start}, {self.end})")

    @classmethod
    def of(cls, start: TimeLike, end: TimeLike) -> "Window":
        return cls(to_timestamp(start), to_timestamp(end))

    @property
    def duration(self) -> int:
        return self.end - self.start

    def expand(self, before: int, after: int | None = None) -> "Window":
        after = before if after is None else after
        return Window(self.start - int(before), self.end + int(after))

    def as_set(self) -> IntervalSet:
        return IntervalSet._raw([self.start], [self.end])


def and_(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return IntervalSet._raw(*kernels.intersect(a.starts, a.ends, b.starts, b.ends))


def or_(a: IntervalSet, b: IntervalSet) -> IntervalSet:
    return IntervalSet._raw(*kernels.union(a.starts, a.ends, b.starts, b.ends))


def not_(a: IntervalSet, w: Window) -> IntervalSet:
    return IntervalSet._raw(*kernels.complement(a.starts, a.ends, w.start, w.end))


def clip(a: IntervalSet, w: Window) -> IntervalSet:
    return and_(a, w.as_set())


def delay(a: IntervalSet, d: int, w: Window) -> IntervalSet:
    """Shift ``a`` forward by ``d`` seconds, then clip to ``w``."""
    d = int(d)
    if d < 0:
        raise ValueError(f"delay must be non-negative, got {d}")
    s = np.maximum(a.starts + d, w.start)
    e = np.minimum(a.ends + d, w.end)
    keep = s < e
    # a shift preserves order and gaps, so the clipped set stays canonical
    return IntervalSet._raw(s[keep], e[keep])


def and_all(sets) -> IntervalSet:
    sets = list(sets)
    out = sets[0]
    for s in sets[1:]:
        out = and_(out, s)
    return out


def or_all(sets) -> IntervalSet:
    sets = list(sets)
    out = sets[0]
    for s in sets[1:]:
        out = or_(out, s)
    return out
