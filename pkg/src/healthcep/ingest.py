"""Source adapters: vendor CSV exports to the unified store schema.

Formats (all timestamps ISO-8601 UTC):

exercise-csv
    One or more activity blocks, each a preamble line
    ``#activity,<type>,<name>,<start>,<end>`` followed by the header
    ``timestamp,heartrate_bpm,power_w,cadence_rpm,altitude_m,lat,lon``
    (any subset of the channel columns) and one row per second.  Empty cells
    mean the channel was not recorded.
health-csv
    Header ``timestamp,stream,value,unit``; one sparse sample per row.
location-csv
    Header ``timestamp,lat,lon,source``.
stations
    ``station_id,lat,lon`` and ``station_id,timestamp,pm25_ugm3``.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path

from .errors import DataError, IngestError
from .exposome import Station, StationReading, StationTable
from .model import EventRecord, Interval, LocationSample, Sample, to_timestamp
from .plan import LOCATION

EXERCISE_CHANNELS = {
    "heartrate_bpm": ("Heartrate", "bpm"),
    "power_w": ("Power", "W"),
    "cadence_rpm": ("Cadence", "rpm"),
    "altitude_m": ("Altitude", "m"),
}
DEFAULT_UNITS = {
    "Heartrate": "bpm",
    "Power": "W",
    "Cadence": "rpm",
    "Altitude": "m",
    "StepCount": "count",
    "Weight": "kg",
    "Stairs": "count/day",
}
ADAPTERS = ("exercise-csv", "health-csv", "location-csv")


def _rows(path):
    """Yield ``(line_number, fields)`` for non-blank lines of a CSV file."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(str(exc), path) from None
    with fh:
        for lineno, fields in enumerate(csv.reader(fh), 1):
            if fields and any(f.strip() for f in fields):
                yield lineno, [f.strip() for f in fields]


def _ts(text, path, lineno):
    try:
        return to_timestamp(text)
    except (ValueError, TypeError) as exc:
        raise IngestError(str(exc), path, lineno) from None


def _num(text, path, lineno, what):
    try:
        x = float(text)
    except ValueError:
        raise IngestError(f"bad {what} {text!r}", path, lineno) from None
    if not math.isfinite(x):
        raise IngestError(f"non-finite {what}", path, lineno)
    return x


def _ensure_stream(store, sid, kind, unit, path, lineno=None):
    known = DEFAULT_UNITS.get(sid)
    if kind == "real" and known is not None and store.kind(sid) is None and unit != known:
        raise IngestError(f"{sid} is measured in {known!r}, not {unit!r}", path, lineno)
    try:
        store.register_stream(sid, kind, unit)
    except DataError as exc:
        raise IngestError(str(exc), path, lineno) from None


def _parse_exercise(path):
    blocks = []
    block = None
    header = None
    for lineno, f in _rows(path):
        if f[0].startswith("#activity"):
            if len(f) != 5 or f[0] != "#activity":
                raise IngestError("activity preamble needs #activity,<type>,<name>,<start>,<end>", path, lineno)
            try:
                interval = Interval(_ts(f[3], path, lineno), _ts(f[4], path, lineno))
            except ValueError as exc:
                raise IngestError(str(exc), path, lineno) from None
            if not f[1]:
                raise IngestError("empty activity type", path, lineno)
            block = {"type": f[1], "name": f[2] or f[1], "interval": interval, "rows": [], "line": lineno}
            blocks.append(block)
            header = None
            continue
        if block is None:
            raise IngestError("missing activity header", path, lineno)
        if header is None:
            if f[0] != "timestamp":
                raise IngestError("expected column header starting with 'timestamp'", path, lineno)
            for col in f[1:]:
                if col not in EXERCISE_CHANNELS and col not in ("lat", "lon"):
                    raise IngestError(f"unknown column/unit {col!r}", path, lineno)
            if ("lat" in f) != ("lon" in f):
                raise IngestError("lat and lon must appear together", path, lineno)
            header = f
            continue
        if len(f) != len(header):
            raise IngestError(f"expected {len(header)} fields, got {len(f)}", path, lineno)
        block["rows"].append((lineno, dict(zip(header, f))))
    if not blocks:
        raise IngestError("missing activity header", path)
    return blocks


def ingest_exercise_csv(path, store, source: str = "strava") -> dict:
    """Load an exercise export: one event per activity block plus its samples."""
    blocks = _parse_exercise(path)
    samples = defaultdict(list)
    locations = []
    events = []
    for b in blocks:
        refs = set()
        for lineno, row in b["rows"]:
            t = _ts(row["timestamp"], path, lineno)
            for col, (sid, unit) in EXERCISE_CHANNELS.items():
                cell = row.get(col, "")
                if cell:
                    samples[(sid, unit)].append(Sample(t, _num(cell, path, lineno, col), unit, source))
                    refs.add(sid)
            lat, lon = row.get("lat", ""), row.get("lon", "")
            if lat or lon:
                if not (lat and lon):
                    raise IngestError("lat and lon must both be present", path, lineno)
                try:
                    locations.append(
                        LocationSample(t, _num(lat, path, lineno, "lat"), _num(lon, path, lineno, "lon"), source)
                    )
                except ValueError as exc:
                    raise IngestError(str(exc), path, lineno) from None
                refs.add(LOCATION)
        events.append(
            EventRecord(
                b["type"], b["name"], b["interval"], {"source": source, "samples": len(b["rows"])}, frozenset(refs)
            )
        )
    counts = {}
    for (sid, unit), lst in samples.items():
        _ensure_stream(store, sid, "real", unit, path)
        counts[sid] = store.append_samples(sid, lst)
    if locations:
        _ensure_stream(store, LOCATION, "location", None, path)
        counts[LOCATION] = store.append_samples(LOCATION, locations)
    n_events = store.append_events(events)
    return {"events": n_events, "samples": counts}


def ingest_health_csv(path, store, source: str = "healthkit") -> dict:
    rows = list(_rows(path))
    if not rows:
        raise IngestError("empty file", path)
    lineno, header = rows[0]
    if header != ["timestamp", "stream", "value", "unit"]:
        raise IngestError("expected header timestamp,stream,value,unit", path, lineno)
    grouped = defaultdict(list)
    for lineno, f in rows[1:]:
        if len(f) != 4:
            raise IngestError(f"expected 4 fields, got {len(f)}", path, lineno)
        if not f[1] or not f[3]:
            raise IngestError("stream and unit must be non-empty", path, lineno)
        sid = store.resolve(f[1])
        unit = f[3]
        if store.kind(sid) == "real" and store.unit(sid) != unit:
            raise IngestError(f"{sid} is registered in {store.unit(sid)!r}, not {unit!r}", path, lineno)
        if store.kind(sid) is None:
            _ensure_stream(store, sid, "real", unit, path, lineno)
        elif store.kind(sid) != "real":
            raise IngestError(f"{sid} is a {store.kind(sid)} stream", path, lineno)
        grouped[sid].append(Sample(_ts(f[0], path, lineno), _num(f[2], path, lineno, "value"), unit, source))
    return {"events": 0, "samples": {sid: store.append_samples(sid, lst) for sid, lst in grouped.items()}}


def ingest_location_csv(path, store, source: str | None = None) -> dict:
    rows = list(_rows(path))
    if not rows:
        raise IngestError("empty file", path)
    lineno, header = rows[0]
    if header != ["timestamp", "lat", "lon", "source"]:
        raise IngestError("expected header timestamp,lat,lon,source", path, lineno)
    out = []
    for lineno, f in rows[1:]:
        if len(f) != 4:
            raise IngestError(f"expected 4 fields, got {len(f)}", path, lineno)
        try:
            out.append(
                LocationSample(
                    _ts(f[0], path, lineno),
                    _num(f[1], path, lineno, "lat"),
                    _num(f[2], path, lineno, "lon"),
                    f[3] or source or "location",
                )
            )
        except ValueError as exc:
            raise IngestError(str(exc), path, lineno) from None
    _ensure_stream(store, LOCATION, "location", None, path)
    return {"events": 0, "samples": {LOCATION: store.append_samples(LOCATION, out)}}


def read_stations(stations_path, readings_path=None) -> StationTable:
    rows = list(_rows(stations_path))
    if not rows or rows[0][1] != ["station_id", "lat", "lon"]:
        raise IngestError("expected header station_id,lat,lon", stations_path, rows[0][0] if rows else None)
    stations = []
    for lineno, f in rows[1:]:
        if len(f) != 3:
            raise IngestError(f"expected 3 fields, got {len(f)}", stations_path, lineno)
        try:
            stations.append(
                Station(f[0], _num(f[1], stations_path, lineno, "lat"), _num(f[2], stations_path, lineno, "lon"))
            )
        except DataError as exc:
            raise IngestError(str(exc), stations_path, lineno) from None
    known = {s.station_id for s in stations}
    if len(known) != len(stations):
        raise IngestError("duplicate station_id", stations_path)
    readings = []
    if readings_path is not None:
        rows = list(_rows(readings_path))
        if not rows or rows[0][1] != ["station_id", "timestamp", "pm25_ugm3"]:
            raise IngestError(
                "expected header station_id,timestamp,pm25_ugm3", readings_path, rows[0][0] if rows else None
            )
        for lineno, f in rows[1:]:
            if len(f) != 3:
                raise IngestError(f"expected 3 fields, got {len(f)}", readings_path, lineno)
            if f[0] not in known:
                raise IngestError(f"reading references unknown station {f[0]!r}", readings_path, lineno)
            try:
                readings.append(
                    StationReading(f[0], _ts(f[1], readings_path, lineno), _num(f[2], readings_path, lineno, "pm25"))
                )
            except DataError as exc:
                raise IngestError(str(exc), readings_path, lineno) from None
    return StationTable(stations, readings)


def ingest_stations(stations_path, readings_path, store=None) -> StationTable:
    """Load and validate a station table; installs it in ``store`` when given."""
    table = read_stations(stations_path, readings_path)
    if store is not None:
        store.set_stations(table)
    return table


def run_adapter(name: str, path, store, source: str | None = None) -> dict:
    if name == "exercise-csv":
        return ingest_exercise_csv(path, store, source or "strava")
    if name == "health-csv":
        return ingest_health_csv(path, store, source or "healthkit")
    if name == "location-csv":
        return ingest_location_csv(path, store, source)
    raise ValueError(f"unknown adapter {name!r}; choose from {', '.join(ADAPTERS)}")
