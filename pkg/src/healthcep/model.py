"""Unified data model shared by every module.

Timestamps are integer seconds since the Unix epoch (UTC).  Intervals are
half-open ``[start, end)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

from . import kernels
from .errors import UnitMismatch

Timestamp = int
TimeLike = Union[int, float, str, datetime, np.integer]

_ISO_FMT = "%Y-%m-%dT%H:%M:%SZ"


def to_timestamp(value: TimeLike) -> Timestamp:
    """Coerce an int, datetime or ISO-8601 string to epoch seconds.

    Sub-second precision is truncated.  Naive datetimes and offset-less
    strings are taken as UTC.
    """
    if isinstance(value, (bool,)):
        raise TypeError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite timestamp: {value!r}")
        return math.floor(value)
    if isinstance(value, str):
        text = value.strip()
        if text.endswith("Z") or text.endswith("z"):
            text = text[:-1] + "+00:00"
        try:
            value = datetime.fromisoformat(text)
        except ValueError:
            raise ValueError(f"bad ISO-8601 timestamp: {value!r}") from None
    if isinstance(value, datetime):
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        return math.floor(value.timestamp())
    raise TypeError(f"not a timestamp: {value!r}")


def format_timestamp(ts: Timestamp) -> str:
    return datetime.fromtimestamp(int(ts), tz=timezone.utc).strftime(_ISO_FMT)


def to_datetime(ts: Timestamp) -> datetime:
    return datetime.fromtimestamp(int(ts), tz=timezone.utc)


@dataclass(frozen=True, order=True)
class Sample:
    timestamp: Timestamp
    value: float
    unit: str
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "timestamp", to_timestamp(self.timestamp))
        object.__setattr__(self, "value", float(self.value))
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite sample value: {self.value!r}")
        if not self.unit:
            raise ValueError("sample unit must be non-empty")


@dataclass(frozen=True, order=True)
class LocationSample:
    timestamp: Timestamp
    latitude: float
    longitude: float
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "timestamp", to_timestamp(self.timestamp))
        lat, lon = float(self.latitude), float(self.longitude)
        if not (-90.0 <= lat <= 90.0):
            raise ValueError(f"latitude out of range: {lat}")
        if not (-180.0 <= lon <= 180.0):
            raise ValueError(f"longitude out of range: {lon}")
        object.__setattr__(self, "latitude", lat)
        object.__setattr__(self, "longitude", lon)


@dataclass(frozen=True, order=True)
class Interval:
    start: Timestamp
    end: Timestamp

    def __post_init__(self):
        object.__setattr__(self, "start", to_timestamp(self.start))
        object.__setattr__(self, "end", to_timestamp(self.end))
        if self.start >= self.end:
            raise ValueError(f"empty interval [{self.start}, {self.end})")

    @property
    def duration(self) -> int:
        return self.end - self.start

    def __contains__(self, t) -> bool:
        return self.start <= t < self.end


class IntervalSet:
    """Canonical set of disjoint, sorted, non-touching half-open intervals.

    Immutable; the bounds live in two read-only int64 arrays.
    """

    __slots__ = ("starts", "ends")

    def __init__(self, starts=(), ends=(), *, _canonical: bool = False):
        s = np.asarray(starts, dtype=np.int64)
        e = np.asarray(ends, dtype=np.int64)
        if s.shape != e.shape or s.ndim != 1:
            raise ValueError("starts and ends must be 1-d and the same length")
        if not _canonical:
            if np.any(s >= e):
                bad = int(np.argmax(s >= e))
                raise ValueError(f"empty interval [{s[bad]}, {e[bad]})")
            s, e = kernels.normalize(s, e)
        s = np.array(s, dtype=np.int64)
        e = np.array(e, dtype=np.int64)
        s.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "starts", s)
        object.__setattr__(self, "ends", e)

    def __setattr__(self, name, value):
        raise AttributeError("IntervalSet is immutable")

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls((), (), _canonical=True)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[TimeLike]]) -> "IntervalSet":
        pairs = [(to_timestamp(a), to_timestamp(b)) for a, b in pairs]
        if not pairs:
            return cls.empty()
        s, e = zip(*pairs)
        return cls(s, e)

    @classmethod
    def _raw(cls, starts, ends) -> "IntervalSet":
        return cls(starts, ends, _canonical=True)

    @property
    def intervals(self) -> tuple:
        return tuple(Interval(int(a), int(b)) for a, b in zip(self.starts, self.ends))

    def pairs(self) -> list:
        return [(int(a), int(b)) for a, b in zip(self.starts, self.ends)]

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.starts)

    def __bool__(self) -> bool:
        return len(self.starts) > 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntervalSet):
            return NotImplemented
        return np.array_equal(self.starts, other.starts) and np.array_equal(self.ends, other.ends)

    def __hash__(self):
        return hash((self.starts.tobytes(), self.ends.tobytes()))

    def __repr__(self) -> str:
        return f"IntervalSet({self.pairs()!r})"

    def contains(self, t: Timestamp) -> bool:
        i = int(np.searchsorted(self.starts, t, side="right")) - 1
        return i >= 0 and t < self.ends[i]

    def total_duration(self) -> int:
        return int(np.sum(self.ends - self.starts)) if len(self.starts) else 0

    def span(self):
        if not len(self.starts):
            return None
        return Interval(int(self.starts[0]), int(self.ends[-1]))


def normalize(intervals: Iterable[Interval | Sequence[TimeLike]]) -> IntervalSet:
    """Canonical interval set covering the union of ``intervals``."""
    starts, ends = [], []
    for iv in intervals:
        if isinstance(iv, Interval):
            a, b = iv.start, iv.end
        else:
            a, b = to_timestamp(iv[0]), to_timestamp(iv[1])
            if a >= b:
                raise ValueError(f"empty interval [{a}, {b})")
        starts.append(a)
        ends.append(b)
    return IntervalSet(starts, ends)


def total_duration(s: IntervalSet) -> int:
    """Covered seconds of an interval set."""
    return s.total_duration()


@dataclass(frozen=True)
class EventRecord:
    event_type: str
    event_name: str
    interval: Interval
    parameters: Mapping[str, Union[str, int, float]] = field(default_factory=dict)
    stream_refs: frozenset = frozenset()

    def __post_init__(self):
        if not self.event_type:
            raise ValueError("event_type must be non-empty")
        if not isinstance(self.interval, Interval):
            object.__setattr__(self, "interval", Interval(*self.interval))
        object.__setattr__(self, "stream_refs", frozenset(self.stream_refs))
        object.__setattr__(self, "parameters", dict(self.parameters))

    @property
    def start(self) -> Timestamp:
        return self.interval.start

    @property
    def end(self) -> Timestamp:
        return self.interval.end

    @property
    def key(self) -> tuple:
        return (self.event_type, self.interval.start, self.interval.end, self.event_name)

    def __hash__(self):
        return hash(self.key)

    def to_json(self) -> dict:
        return {
            "event_type": self.event_type,
            "event_name": self.event_name,
            "start": format_timestamp(self.interval.start),
            "end": format_timestamp(self.interval.end),
            "parameters": dict(self.parameters),
            "stream_refs": sorted(self.stream_refs),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "EventRecord":
        return cls(
            event_type=obj["event_type"],
            event_name=obj.get("event_name", obj["event_type"]),
            interval=Interval(to_timestamp(obj["start"]), to_timestamp(obj["end"])),
            parameters=obj.get("parameters", {}),
            stream_refs=frozenset(obj.get("stream_refs", ())),
        )


@dataclass(frozen=True)
class Series:
    """Column view of one real-valued stream: sorted times, values, one unit."""

    times: np.ndarray
    values: np.ndarray
    unit: str

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.int64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-d and the same length")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def empty(cls, unit: str) -> "Series":
        return cls(np.empty(0, np.int64), np.empty(0), unit)

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], unit: str | None = None) -> "Series":
        samples = list(samples)
        if not samples:
            return cls.empty(unit or "")
        units = {s.unit for s in samples}
        if len(units) > 1:
            raise UnitMismatch(f"mixed units in one stream: {sorted(units)}")
        (found,) = units
        if unit is not None and unit != found:
            raise UnitMismatch(f"expected unit {unit!r}, samples carry {found!r}")
        return cls(
            np.fromiter((s.timestamp for s in samples), np.int64, len(samples)),
            np.fromiter((s.value for s in samples), np.float64, len(samples)),
            found,
        )

    def to_samples(self, source: str = "") -> list:
        return [Sample(int(t), float(v), self.unit, source) for t, v in zip(self.times, self.values)]

    def __len__(self) -> int:
        return len(self.times)

    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.times) >= 0))

