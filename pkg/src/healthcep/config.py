"""Runtime configuration loaded from an INI file.

Example::

    [detectors]
    max_gap = 60          # seconds a sample value is held
    min_duration = 0      # shortest threshold run kept, seconds

    [detect-spike]
    baseline_window = 120
    delta = 25
    max_spike_duration = 60

    [detect-climb]
    smoothing_window = 30
    min_ascent_rate = 0.2
    min_total_gain = 10
    max_gap = 30

    [subject]
    body_mass = 70
    vt_rest_per_kg = 0.007
    vt_max_per_kg = 0.030
    rr_anchors = 60:12, 120:20, 150:30, 190:40

    [spo2]
    anchors = 0:98, 1500:97, 2500:95, 3500:93, 4500:88, 5500:84

    [exposome]
    max_km = 50

    [aliases]
    HR = Heartrate

Every key is optional.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .detectors import DEFAULT_MAX_GAP, ClimbSpec, SpikeSpec
from .errors import DataError
from .exposome import DEFAULT_MAX_KM
from .physio import DEFAULT_SPO2_ANCHORS, SubjectProfile

DEFAULT_ALIASES = {"HR": "Heartrate"}


def parse_anchors(text: str) -> tuple:
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            x, y = item.split(":")
            pairs.append((float(x), float(y)))
        except ValueError:
            raise DataError(f"bad anchor {item!r}; expected x:y") from None
    return tuple(pairs)


@dataclass(frozen=True)
class Config:
    max_gap: int = DEFAULT_MAX_GAP
    min_duration: int = 0
    spike: SpikeSpec = field(default_factory=SpikeSpec)
    climb: ClimbSpec = field(default_factory=ClimbSpec)
    profile: SubjectProfile = field(default_factory=SubjectProfile)
    spo2_anchors: tuple = DEFAULT_SPO2_ANCHORS
    max_km: float = DEFAULT_MAX_KM
    aliases: dict = field(default_factory=lambda: dict(DEFAULT_ALIASES))

    @classmethod
    def load(cls, path: str | Path | None) -> "Config":
        if path is None:
            return cls()
        parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
        parser.optionxform = str  # keep alias case
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise DataError(f"cannot read config {path}: {exc}") from None
        try:
            return cls._from_parser(parser)
        except (ValueError, TypeError) as exc:
            raise DataError(f"invalid config {path}: {exc}") from None

    @classmethod
    def _from_parser(cls, p: configparser.ConfigParser) -> "Config":
        cfg = cls()
        changes = {}
        if p.has_section("detectors"):
            d = p["detectors"]
            changes["max_gap"] = d.getint("max_gap", cfg.max_gap)
            changes["min_duration"] = d.getint("min_duration", cfg.min_duration)
        max_gap = changes.get("max_gap", cfg.max_gap)
        spike_kw = {"max_gap": max_gap}
        if p.has_section("detect-spike"):
            s = p["detect-spike"]
            for key in ("baseline_window", "max_spike_duration", "max_gap"):
                if key in s:
                    spike_kw[key] = s.getint(key)
            if "delta" in s:
                spike_kw["delta"] = s.getfloat("delta")
        changes["spike"] = replace(cfg.spike, **spike_kw)
        if p.has_section("detect-climb"):
            c = p["detect-climb"]
            kw = {}
            for key in ("smoothing_window", "max_gap"):
                if key in c:
                    kw[key] = c.getint(key)
            for key in ("min_ascent_rate", "min_total_gain"):
                if key in c:
                    kw[key] = c.getfloat(key)
            changes["climb"] = replace(cfg.climb, **kw)
        if p.has_section("subject"):
            s = p["subject"]
            kw = {}
            for key in ("body_mass", "vt_rest_per_kg", "vt_max_per_kg"):
                if key in s:
                    kw[key] = s.getfloat(key)
            if "rr_anchors" in s:
                kw["rr_anchors"] = parse_anchors(s["rr_anchors"])
            changes["profile"] = replace(cfg.profile, **kw)
        if p.has_section("spo2") and "anchors" in p["spo2"]:
            changes["spo2_anchors"] = parse_anchors(p["spo2"]["anchors"])
        if p.has_section("exposome"):
            changes["max_km"] = p["exposome"].getfloat("max_km", cfg.max_km)
        if p.has_section("aliases"):
            aliases = dict(cfg.aliases)
            aliases.update(p["aliases"])
            changes["aliases"] = aliases
        return replace(cfg, **changes)
