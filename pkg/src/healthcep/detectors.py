"""Event detectors: turn data streams into interval sets.

All detectors read a stream as a sample-and-hold signal: a sample's value is
valid from its timestamp until the next sample or for ``max_gap`` seconds,
whichever comes first.  A cap below one second is widened to one second so
that isolated samples never produce empty intervals.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels
from .errors import UnitMismatch, UnsortedInput
from .model import EventRecord, IntervalSet, Sample, Series

DEFAULT_MAX_GAP = 60

COMPARATORS = {
    ">": operator.gt,
    ">=": operator.ge,
    "<": operator.lt,
    "<=": operator.le,
}


def as_series(samples, unit: str | None = None) -> Series:
    if isinstance(samples, Series):
        if unit is not None and len(samples) and samples.unit != unit:
            raise UnitMismatch(f"expected unit {unit!r}, stream carries {samples.unit!r}")
        series = samples
    else:
        series = Series.from_samples(samples, unit)
    if not series.is_sorted():
        raise UnsortedInput("samples must be sorted by timestamp")
    return series


def _hold_cap(max_gap) -> int:
    return max(int(max_gap), 1)


def _drop_short(runs: IntervalSet, min_duration: int) -> IntervalSet:
    if min_duration <= 0 or not len(runs):
        return runs
    keep = (runs.ends - runs.starts) >= min_duration
    return IntervalSet._raw(runs.starts[keep], runs.ends[keep])


def held_support(samples, max_gap: int = DEFAULT_MAX_GAP) -> IntervalSet:
    """Time covered by the held signal regardless of value."""
    s = as_series(samples)
    return IntervalSet._raw(*kernels.hold_runs(s.times, np.ones(len(s), np.uint8), _hold_cap(max_gap)))


def hold_values(series: Series, at_times: np.ndarray, max_gap: int = DEFAULT_MAX_GAP):
    """Held value of ``series`` at each of ``at_times``.

    Returns ``(values, valid)``; ``valid`` is false where no sample is held.
    """
    at_times = np.asarray(at_times, dtype=np.int64)
    if not len(series):
        return np.full(len(at_times), np.nan), np.zeros(len(at_times), bool)
    idx = np.searchsorted(series.times, at_times, side="right") - 1
    valid = idx >= 0
    safe = np.where(valid, idx, 0)
    valid &= at_times < series.times[safe] + _hold_cap(max_gap)
    values = np.where(valid, series.values[safe], np.nan)
    return values, valid


@dataclass(frozen=True)
class ThresholdSpec:
    stream: str
    op: str
    value: float
    unit: str | None = None
    min_duration: int = 0
    max_gap: int = DEFAULT_MAX_GAP

    def __post_init__(self):
        op = {"≥": ">=", "≤": "<="}.get(self.op, self.op)
        if op not in COMPARATORS:
            raise ValueError(f"unknown comparison operator {self.op!r}")
        object.__setattr__(self, "op", op)
        if self.min_duration < 0 or self.max_gap < 0:
            raise ValueError("min_duration and max_gap must be non-negative")
        if not math.isfinite(self.value):
            raise ValueError("threshold must be finite")

    @property
    def locality(self) -> int:
        return int(self.max_gap) + int(self.min_duration)


def threshold_events(samples, spec: ThresholdSpec) -> IntervalSet:
    """Maximal intervals where the held signal satisfies ``spec``."""
    s = as_series(samples, spec.unit)
    if not len(s):
        return IntervalSet.empty()
    mask = COMPARATORS[spec.op](s.values, spec.value).astype(np.uint8)
    runs = IntervalSet._raw(*kernels.hold_runs(s.times, mask, _hold_cap(spec.max_gap)))
    return _drop_short(runs, int(spec.min_duration))


@dataclass(frozen=True)
class SpikeSpec:
    baseline_window: int = 120
    delta: float = 25.0
    max_spike_duration: int = 60
    max_gap: int = DEFAULT_MAX_GAP

    def __post_init__(self):
        if self.baseline_window <= 0 or self.delta <= 0 or self.max_spike_duration <= 0:
            raise ValueError("spike parameters must be positive")
        if self.max_gap < 0:
            raise ValueError("max_gap must be non-negative")

    @property
    def locality(self) -> int:
        return int(self.baseline_window) + int(self.max_gap) + int(self.max_spike_duration)


def detect_spike(hr, spec: SpikeSpec = SpikeSpec()) -> IntervalSet:
    """Short excursions above a rolling-median baseline.

    A sample exceeds when its value is at least ``delta`` above the median of
    the earlier samples within ``baseline_window`` seconds.  Exceedance runs
    longer than ``max_spike_duration`` are sustained effort and are dropped.
    """
    s = as_series(hr)
    if not len(s):
        return IntervalSet.empty()
    baseline = kernels.trailing_median(s.times, s.values, int(spec.baseline_window))
    with np.errstate(invalid="ignore"):
        mask = (s.values >= baseline + spec.delta) & ~np.isnan(baseline)
    runs = IntervalSet._raw(*kernels.hold_runs(s.times, mask.astype(np.uint8), _hold_cap(spec.max_gap)))
    if not len(runs):
        return runs
    keep = (runs.ends - runs.starts) <= spec.max_spike_duration
    return IntervalSet._raw(runs.starts[keep], runs.ends[keep])


@dataclass(frozen=True)
class ClimbSpec:
    smoothing_window: int = 30
    min_ascent_rate: float = 0.2
    min_total_gain: float = 10.0
    max_gap: int = 30

    def __post_init__(self):
        if (
            self.smoothing_window <= 0
            or self.min_ascent_rate <= 0
            or self.min_total_gain <= 0
            or self.max_gap <= 0
        ):
            raise ValueError("climb parameters must be positive")

    @property
    def locality(self) -> int:
        # a run with too little gain has fewer than gain/rate rising segments,
        # each at least 1 s long and at most max_gap apart
        segments = math.ceil(self.min_total_gain / self.min_ascent_rate)
        return int(self.smoothing_window) + 2 * int(self.max_gap) + segments * (1 + int(self.max_gap))


def smooth_centered(times: np.ndarray, values: np.ndarray, window: int) -> np.ndarray:
    """Mean of the samples within ``window / 2`` seconds of each sample."""
    if not len(times):
        return np.empty(0)
    half = window / 2.0
    csum = np.concatenate(([0.0], np.cumsum(values)))
    lo = np.searchsorted(times, times - half, side="left")
    hi = np.searchsorted(times, times + half, side="right")
    return (csum[hi] - csum[lo]) / (hi - lo)


def detect_climb(altitude, spec: ClimbSpec = ClimbSpec()) -> IntervalSet:
    """Intervals of sustained ascent on a smoothed altitude profile."""
    s = as_series(altitude)
    if len(s) < 2:
        return IntervalSet.empty()
    smooth = smooth_centered(s.times, s.values, spec.smoothing_window)
    dt = np.diff(s.times)
    gain = np.diff(smooth)
    ok = (dt > 0) & (dt <= spec.max_gap)
    rate = np.where(ok, gain / np.where(dt > 0, dt, 1), 0.0)
    rising = ok & (rate >= spec.min_ascent_rate)
    seg_s = s.times[:-1][rising]
    seg_e = s.times[1:][rising]
    seg_gain = gain[rising]
    if not len(seg_s):
        return IntervalSet.empty()
    # close gaps of at most max_gap between rising segments
    new_run = np.concatenate(([True], seg_s[1:] - seg_e[:-1] > spec.max_gap))
    run_id = np.cumsum(new_run) - 1
    n_runs = int(run_id[-1]) + 1
    run_s = seg_s[new_run]
    run_e = np.zeros(n_runs, np.int64)
    np.maximum.at(run_e, run_id, seg_e)
    run_gain = np.bincount(run_id, weights=seg_gain, minlength=n_runs)
    keep = run_gain >= spec.min_total_gain
    return IntervalSet._raw(run_s[keep], run_e[keep])


def extend_intervals(s: IntervalSet, d: int) -> IntervalSet:
    """Stretch each interval's end by ``d`` seconds ("within d after")."""
    if d < 0:
        raise ValueError("extension must be non-negative")
    if not len(s):
        return s
    return IntervalSet(s.starts, s.ends + int(d))


def events_to_intervalset(events: Sequence[EventRecord], event_type: str) -> IntervalSet:
    pairs = [(e.interval.start, e.interval.end) for e in events if e.event_type == event_type]
    if not pairs:
        return IntervalSet.empty()
    starts, ends = zip(*pairs)
    return IntervalSet(starts, ends)


DETECTORS = {
    "detect-spike": (detect_spike, SpikeSpec),
    "detect-climb": (detect_climb, ClimbSpec),
}


def detector_spec(name: str, base=None, **kwargs):
    """Parameter spec of a registered detector, ``base`` overridden by kwargs."""
    _, spec_cls = DETECTORS[name]
    fields = spec_cls.__dataclass_fields__
    coerced = {}
    for key, value in kwargs.items():
        if key not in fields:
            raise TypeError(f"{name} has no parameter {key!r}")
        coerced[key] = int(value) if fields[key].type == "int" else float(value)
    return replace(base if base is not None else spec_cls(), **coerced)


__all__ = [
    "ClimbSpec",
    "DEFAULT_MAX_GAP",
    "DETECTORS",
    "SpikeSpec",
    "ThresholdSpec",
    "detect_climb",
    "detect_spike",
    "detector_spec",
    "events_to_intervalset",
    "extend_intervals",
    "held_support",
    "hold_values",
    "threshold_events",
]
