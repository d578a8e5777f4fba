"""Derived physiological streams.

Piecewise-linear models keyed by anchor tables; the tables are configuration
(see :mod:`healthcep.config`), the defaults below are only fallbacks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detectors import DEFAULT_MAX_GAP, as_series, hold_values
from .errors import UnitMismatch
from .model import Series

DEFAULT_RR_ANCHORS = ((60.0, 12.0), (120.0, 20.0), (150.0, 30.0), (190.0, 40.0))
DEFAULT_SPO2_ANCHORS = (
    (0.0, 98.0),
    (1500.0, 97.0),
    (2500.0, 95.0),
    (3500.0, 93.0),
    (4500.0, 88.0),
    (5500.0, 84.0),
)

BREATHS_PER_MIN = "breaths/min"
LITERS = "L"
CONCENTRATION = "ug/m3"
INTAKE = "ug/min"
PERCENT = "%"


def _check_anchors(anchors, increasing_y: bool | None):
    xs = np.array([a[0] for a in anchors], dtype=float)
    ys = np.array([a[1] for a in anchors], dtype=float)
    if len(xs) < 2:
        raise ValueError("need at least two anchors")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("anchor x values must be strictly increasing")
    if increasing_y is True and np.any(np.diff(ys) <= 0):
        raise ValueError("anchor y values must be strictly increasing")
    if increasing_y is False and np.any(np.diff(ys) >= 0):
        raise ValueError("anchor y values must be strictly decreasing")
    return xs, ys


@dataclass(frozen=True)
class SubjectProfile:
    body_mass: float = 70.0
    vt_rest_per_kg: float = 0.007
    vt_max_per_kg: float = 0.030
    rr_anchors: tuple = field(default=DEFAULT_RR_ANCHORS)

    def __post_init__(self):
        if self.body_mass <= 0:
            raise ValueError("body_mass must be positive")
        if self.vt_rest_per_kg <= 0 or self.vt_max_per_kg < self.vt_rest_per_kg:
            raise ValueError("need 0 < vt_rest_per_kg <= vt_max_per_kg")
        anchors = tuple((float(x), float(y)) for x, y in self.rr_anchors)
        _check_anchors(anchors, increasing_y=True)
        object.__setattr__(self, "rr_anchors", anchors)


def _hr_series(hr) -> Series:
    s = as_series(hr)
    if len(s) and s.unit != "bpm":
        raise UnitMismatch(f"heart rate must be in bpm, got {s.unit!r}")
    return s


def breathing_rate(hr, profile: SubjectProfile = SubjectProfile()) -> Series:
    s = _hr_series(hr)
    xs, ys = _check_anchors(profile.rr_anchors, True)
    return Series(s.times, np.interp(s.values, xs, ys), BREATHS_PER_MIN)


def tidal_volume(hr, profile: SubjectProfile = SubjectProfile()) -> Series:
    s = _hr_series(hr)
    lo = profile.rr_anchors[0][0]
    hi = profile.rr_anchors[-1][0]
    frac = np.clip((s.values - lo) / (hi - lo), 0.0, 1.0)
    per_kg = profile.vt_rest_per_kg + frac * (profile.vt_max_per_kg - profile.vt_rest_per_kg)
    return Series(s.times, profile.body_mass * per_kg, LITERS)


def pm25_intake_rate(rr, vt, conc, max_gap: int = DEFAULT_MAX_GAP) -> Series:
    """Inhaled PM2.5 per minute: breaths/min x litres x ug/m3 / 1000.

    ``vt`` and ``conc`` are held onto ``rr``'s timestamps; timestamps where
    either has no held value are skipped.
    """
    rr, vt, conc = as_series(rr), as_series(vt), as_series(conc)
    for series, unit in ((rr, BREATHS_PER_MIN), (vt, LITERS), (conc, CONCENTRATION)):
        if len(series) and series.unit != unit:
            raise UnitMismatch(f"expected {unit!r}, got {series.unit!r}")
    vt_v, vt_ok = hold_values(vt, rr.times, max_gap)
    c_v, c_ok = hold_values(conc, rr.times, max_gap)
    ok = vt_ok & c_ok
    intake = rr.values[ok] * vt_v[ok] * c_v[ok] * 0.001
    return Series(rr.times[ok], intake, INTAKE)


def spo2_from_altitude(altitude, anchors=DEFAULT_SPO2_ANCHORS) -> Series:
    s = as_series(altitude)
    if len(s) and s.unit != "m":
        raise UnitMismatch(f"altitude must be in m, got {s.unit!r}")
    xs, ys = _check_anchors(anchors, increasing_y=False)
    return Series(s.times, np.interp(s.values, xs, ys), PERCENT)
