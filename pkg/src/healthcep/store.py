"""Append-only store for data streams and events, plus continuous evaluation.

On-disk layout of a store directory::

    registry.json            stream registry, definitions, continuous state
    streams/<id>.csv         timestamp,value,unit,source     (real streams)
                             timestamp,lat,lon,source        (location streams)
    events/<type>.jsonl      one EventRecord per line
    stations/stations.csv    station_id,lat,lon
    stations/readings.csv    station_id,timestamp,pm25_ugm3

Every record file is append-only.  A trailing partial line (an interrupted
write) is discarded when the store is opened.  ``Store(None)`` keeps
everything in memory.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import logging
import math
import os
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from . import dsl
from .algebra import Window
from .config import Config
from .errors import DataError, DuplicateDefinition, KindMismatch, UnknownStream
from .exposome import Station, StationReading, StationTable
from .model import (
    EventRecord,
    LocationSample,
    Sample,
    Series,
    format_timestamp,
    to_timestamp,
)

log = logging.getLogger(__name__)

KINDS = ("real", "location", "event")
LOCATION_UNIT = "deg"
_SRC_BITS = 16


@dataclass
class StreamInfo:
    kind: str
    unit: str
    sources: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"kind": self.kind, "unit": self.unit, "sources": list(self.sources)}


class _Columns:
    """Growable, sorted column arrays for one stream.

    Rows are ordered by ``(time, source code)``; ``a`` and ``b`` hold the
    value (real) or latitude/longitude (location).
    """

    def __init__(self, two_values: bool):
        self.two = two_values
        self.n = 0
        self.t = np.empty(0, np.int64)
        self.src = np.empty(0, np.int64)
        self.a = np.empty(0)
        self.b = np.empty(0) if two_values else None

    def _grow(self, need: int):
        cap = len(self.t)
        if need <= cap:
            return
        cap = max(need, 2 * cap, 64)
        for name in ("t", "src", "a", "b"):
            old = getattr(self, name)
            if old is None:
                continue
            new = np.empty(cap, old.dtype)
            new[: self.n] = old[: self.n]
            setattr(self, name, new)

    def keys(self, t, src):
        return (np.asarray(t, np.int64) << _SRC_BITS) | np.asarray(src, np.int64)

    def add(self, t, src, a, b=None) -> np.ndarray:
        """Insert rows not already present; returns the mask of inserted rows."""
        t = np.asarray(t, np.int64)
        src = np.asarray(src, np.int64)
        a = np.asarray(a, float)
        b = np.asarray(b, float) if self.two else None
        keys = self.keys(t, src)
        # first occurrence wins inside the batch
        _, first = np.unique(keys, return_index=True)
        fresh = np.zeros(len(t), bool)
        fresh[first] = True
        if self.n and len(t):
            lo = int(np.searchsorted(self.t[: self.n], t.min(), "left"))
            hi = int(np.searchsorted(self.t[: self.n], t.max(), "right"))
            if hi > lo:
                existing = self.keys(self.t[lo:hi], self.src[lo:hi])
                fresh &= ~np.isin(keys, existing)
        if not fresh.any():
            return fresh
        nt, ns, na = t[fresh], src[fresh], a[fresh]
        nb = b[fresh] if self.two else None
        order = np.lexsort((ns, nt))
        nt, ns, na = nt[order], ns[order], na[order]
        nb = nb[order] if self.two else None
        m = len(nt)
        if self.n == 0 or (nt[0], ns[0]) > (self.t[self.n - 1], self.src[self.n - 1]):
            self._grow(self.n + m)
            sl = slice(self.n, self.n + m)
            self.t[sl], self.src[sl], self.a[sl] = nt, ns, na
            if self.two:
                self.b[sl] = nb
        else:
            cur = slice(0, self.n)
            allt = np.concatenate((self.t[cur], nt))
            alls = np.concatenate((self.src[cur], ns))
            order = np.lexsort((alls, allt))
            self._grow(self.n + m)
            self.a[: self.n + m] = np.concatenate((self.a[cur], na))[order]
            if self.two:
                self.b[: self.n + m] = np.concatenate((self.b[cur], nb))[order]
            self.t[: self.n + m] = allt[order]
            self.src[: self.n + m] = alls[order]
        self.n += m
        return fresh

    def range(self, start: int, end: int) -> slice:
        t = self.t[: self.n]
        return slice(int(np.searchsorted(t, start, "left")), int(np.searchsorted(t, end, "left")))


@dataclass
class ContinuousState:
    origin: int | None = None
    frontier: int | None = None
    pending_start: int | None = None

    def to_json(self) -> dict:
        return {"origin": self.origin, "frontier": self.frontier, "pending_start": self.pending_start}


class Store:
    """Single-writer store.  Pass ``None`` as ``path`` for an in-memory store."""

    def __init__(self, path: str | os.PathLike | None = None, config: Config | None = None):
        self.path = Path(path) if path is not None else None
        self.config = config or Config()
        self.registry: dict = {}
        self.aliases: dict = {}
        self.stations = StationTable([])
        self.scheduled: deque = deque()
        self._columns: dict = {}
        self._events: dict = {}
        self._event_keys: dict = {}
        self._definitions: dict = {}
        self._definition_text: dict = {}
        self._plans: dict = {}
        self._continuous: dict = {}
        self._watermarks: dict = {}
        self.first_timestamp: int | None = None
        if self.path is not None:
            self._open()

    # -- persistence -----------------------------------------------------

    def _file(self, *parts) -> Path:
        return self.path.joinpath(*parts)

    def _open(self):
        self.path.mkdir(parents=True, exist_ok=True)
        (self.path / "streams").mkdir(exist_ok=True)
        (self.path / "events").mkdir(exist_ok=True)
        reg = self._file("registry.json")
        state = {}
        if reg.exists():
            with open(reg, encoding="utf-8") as fh:
                state = json.load(fh)
        self.aliases = dict(state.get("aliases", {}))
        for sid, info in state.get("streams", {}).items():
            self.registry[sid] = StreamInfo(info["kind"], info["unit"], list(info.get("sources", [])))
            if info["kind"] != "event":
                self._columns[sid] = _Columns(info["kind"] == "location")
            else:
                self._events.setdefault(sid, [])
                self._event_keys.setdefault(sid, set())
        defined = set(state.get("definitions", {}))
        for sid, info in self.registry.items():
            if info.kind == "event":
                self._load_events(sid, note=sid not in defined)
            else:
                self._load_stream(sid)
        self._load_stations()
        for name, text in state.get("definitions", {}).items():
            (d,) = dsl.parse(text)
            self._install_definition(d, persist=False)
        for name, st in state.get("continuous", {}).items():
            if name in self._continuous:
                self._continuous[name] = ContinuousState(**st)

    def _read_lines(self, path: Path) -> list:
        """Complete lines of ``path``; a trailing partial line is cut off the file."""
        if not path.exists():
            return []
        data = path.read_bytes()
        if data and not data.endswith(b"\n"):
            keep = data.rfind(b"\n") + 1
            log.warning("%s: dropping partial trailing record", path)
            with open(path, "r+b") as fh:
                fh.truncate(keep)
            data = data[:keep]
        return data.decode("utf-8").splitlines()

    def _load_stream(self, sid: str):
        path = self._file("streams", f"{sid}.csv")
        info = self.registry[sid]
        rows_t, rows_s, rows_a, rows_b = [], [], [], []
        for lineno, line in enumerate(self._read_lines(path), 1):
            if not line:
                continue
            parts = line.split(",")
            try:
                if len(parts) != 4:
                    raise ValueError("expected 4 fields")
                t = to_timestamp(parts[0])
                src = self._source_code(sid, parts[3], persist=False)
                if info.kind == "real":
                    if parts[2] != info.unit:
                        raise ValueError(f"unit {parts[2]!r} != {info.unit!r}")
                    rows_a.append(float(parts[1]))
                else:
                    rows_a.append(float(parts[1]))
                    rows_b.append(float(parts[2]))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            rows_t.append(t)
            rows_s.append(src)
        if rows_t:
            self._columns[sid].add(rows_t, rows_s, rows_a, rows_b if info.kind == "location" else None)
            self._note_times(sid, min(rows_t), max(rows_t))

    def _load_events(self, etype: str, note: bool = True):
        path = self._file("events", f"{etype}.jsonl")
        for lineno, line in enumerate(self._read_lines(path), 1):
            if not line:
                continue
            try:
                ev = EventRecord.from_json(json.loads(line))
            except (ValueError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
            if self._insert_event(ev) and note:
                self._note_times(etype, ev.start, ev.start)

    def _load_stations(self):
        spath = self._file("stations", "stations.csv")
        rpath = self._file("stations", "readings.csv")
        if spath.exists():
            from .ingest import read_stations

            self.stations = read_stations(spath, rpath if rpath.exists() else None)

    def _save_registry(self):
        if self.path is None:
            return
        state = {
            "streams": {sid: info.to_json() for sid, info in sorted(self.registry.items())},
            "aliases": dict(self.aliases),
            "definitions": dict(self._definition_text),
            "continuous": {n: s.to_json() for n, s in self._continuous.items()},
        }
        tmp = self._file("registry.json.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(state, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, self._file("registry.json"))

    def _append_lines(self, parts: tuple, lines: Iterable[str]):
        if self.path is None:
            return
        path = self._file(*parts)
        text = "".join(line + "\n" for line in lines)
        if text:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(text)

    # -- registry --------------------------------------------------------

    def register_stream(self, stream_id: str, kind: str, unit: str | None = None) -> StreamInfo:
        """Register a stream (idempotent).  The kind of a stream never changes."""
        if kind not in KINDS:
            raise ValueError(f"unknown stream kind {kind!r}")
        if not stream_id or "/" in stream_id or stream_id.startswith("."):
            raise DataError(f"invalid stream id {stream_id!r}")
        if kind == "location":
            unit = LOCATION_UNIT
        elif kind == "event":
            unit = unit or "event"
        elif not unit:
            raise DataError(f"real stream {stream_id!r} needs a unit")
        info = self.registry.get(stream_id)
        if info is not None:
            if info.kind != kind:
                raise KindMismatch(f"{stream_id!r} is a {info.kind} stream, not {kind}")
            if kind == "real" and info.unit != unit:
                raise DataError(f"{stream_id!r} is registered in {info.unit!r}, not {unit!r}")
            return info
        info = StreamInfo(kind, unit)
        self.registry[stream_id] = info
        if kind == "event":
            self._events.setdefault(stream_id, [])
            self._event_keys.setdefault(stream_id, set())
        else:
            self._columns[stream_id] = _Columns(kind == "location")
        self._save_registry()
        return info

    def resolve(self, name: str) -> str:
        if name in self.registry or name in self._definitions:
            return name
        return self.aliases.get(name) or self.config.aliases.get(name) or name

    def kind(self, stream_id: str):
        info = self.registry.get(stream_id)
        return info.kind if info else None

    def unit(self, stream_id: str):
        return self.registry[stream_id].unit

    def _info(self, stream_id: str) -> StreamInfo:
        sid = self.resolve(stream_id)
        info = self.registry.get(sid)
        if info is None:
            raise UnknownStream(f"unknown stream {stream_id!r}")
        return info

    def _source_code(self, sid: str, source: str, persist: bool = True) -> int:
        info = self.registry[sid]
        try:
            return info.sources.index(source)
        except ValueError:
            if len(info.sources) >= (1 << _SRC_BITS):
                raise DataError(f"too many sources for {sid!r}") from None
            info.sources.append(source)
            if persist:
                self._save_registry()
            return len(info.sources) - 1

    def _note_times(self, sid: str, lo: int, hi: int):
        if self.first_timestamp is None or lo < self.first_timestamp:
            self.first_timestamp = int(lo)
        if hi + 1 > self._watermarks.get(sid, -math.inf):
            self._watermarks[sid] = int(hi) + 1

    def watermark(self, stream_id: str | None = None):
        """Per-stream watermark, or the store-wide one when ``stream_id`` is None."""
        if stream_id is not None:
            return self._watermarks.get(self.resolve(stream_id))
        return max(self._watermarks.values()) if self._watermarks else None

    # -- samples ---------------------------------------------------------

    def append_samples(self, stream_id: str, samples, source: str | None = None) -> int:
        """Append samples; returns how many were new.

        ``samples`` is a sequence of :class:`Sample` / :class:`LocationSample`
        or a :class:`Series` (then ``source`` names its origin).
        """
        sid = self.resolve(stream_id)
        info = self._info(sid)
        if info.kind == "event":
            raise KindMismatch(f"{stream_id!r} is an event stream")
        cols = self._columns[sid]
        if isinstance(samples, Series):
            if len(samples) and samples.unit != info.unit:
                raise DataError(f"{stream_id}: unit {samples.unit!r} != registered {info.unit!r}")
            if info.kind != "real":
                raise KindMismatch(f"{stream_id!r} is a {info.kind} stream")
            if not np.all(np.isfinite(samples.values)):
                raise DataError(f"{stream_id}: non-finite value")
            code = self._source_code(sid, source or "")
            t = samples.times
            src = np.full(len(t), code, np.int64)
            a, b = samples.values, None
            names = [source or ""]
        else:
            samples = list(samples)
            if not samples:
                return 0
            expected = Sample if info.kind == "real" else LocationSample
            for s in samples:
                if not isinstance(s, expected):
                    raise KindMismatch(f"{stream_id!r} is a {info.kind} stream; got {type(s).__name__}")
                if info.kind == "real" and s.unit != info.unit:
                    raise DataError(f"{stream_id}: unit {s.unit!r} != registered {info.unit!r}")
            names = sorted({s.source for s in samples})
            codes = {n: self._source_code(sid, n) for n in names}
            t = np.fromiter((s.timestamp for s in samples), np.int64, len(samples))
            src = np.fromiter((codes[s.source] for s in samples), np.int64, len(samples))
            if info.kind == "real":
                a, b = np.fromiter((s.value for s in samples), float, len(samples)), None
            else:
                a = np.fromiter((s.latitude for s in samples), float, len(samples))
                b = np.fromiter((s.longitude for s in samples), float, len(samples))
        if not len(t):
            return 0
        fresh = cols.add(t, src, a, b)
        count = int(fresh.sum())
        if count:
            self._note_times(sid, int(t[fresh].min()), int(t[fresh].max()))
            self._persist_rows(sid, info, t[fresh], src[fresh], a[fresh], None if b is None else b[fresh])
            self._trigger(sid)
        return count

    def _persist_rows(self, sid, info, t, src, a, b):
        if self.path is None:
            return
        fmt = format_timestamp
        if info.kind == "real":
            lines = (f"{fmt(ti)},{ai!r},{info.unit},{info.sources[si]}" for ti, si, ai in zip(t, src, a.tolist()))
        else:
            lines = (
                f"{fmt(ti)},{ai!r},{bi!r},{info.sources[si]}"
                for ti, si, ai, bi in zip(t, src, a.tolist(), b.tolist())
            )
        self._append_lines(("streams", f"{sid}.csv"), lines)

    def query_series(self, stream_id: str, window: Window) -> Series:
        sid = self.resolve(stream_id)
        info = self._info(sid)
        if info.kind != "real":
            raise KindMismatch(f"{stream_id!r} is a {info.kind} stream")
        cols = self._columns[sid]
        sl = cols.range(window.start, window.end)
        return Series(cols.t[sl].copy(), cols.a[sl].copy(), info.unit)

    def query_samples(self, stream_id: str, window: Window) -> list:
        """Samples with timestamps in ``[window.start, window.end)``, time-sorted."""
        sid = self.resolve(stream_id)
        info = self._info(sid)
        if info.kind == "event":
            raise KindMismatch(f"{stream_id!r} is an event stream")
        cols = self._columns[sid]
        sl = cols.range(window.start, window.end)
        names = info.sources
        if info.kind == "real":
            return [
                Sample(int(t), a, info.unit, names[s])
                for t, s, a in zip(cols.t[sl], cols.src[sl], cols.a[sl].tolist())
            ]
        return [
            LocationSample(int(t), a, b, names[s])
            for t, s, a, b in zip(cols.t[sl], cols.src[sl], cols.a[sl].tolist(), cols.b[sl].tolist())
        ]

    def sample_count(self, stream_id: str) -> int:
        return self._columns[self.resolve(stream_id)].n

    # -- events ----------------------------------------------------------

    def _insert_event(self, ev: EventRecord) -> bool:
        keys = self._event_keys.setdefault(ev.event_type, set())
        if ev.key in keys:
            return False
        keys.add(ev.key)
        lst = self._events.setdefault(ev.event_type, [])
        bisect.insort(lst, ev, key=lambda e: (e.start, e.end, e.event_name))
        return True

    def append_events(self, events: Iterable[EventRecord]) -> int:
        """Append events; duplicates of (type, start, end, name) are dropped."""
        written = []
        for ev in events:
            if not isinstance(ev, EventRecord):
                raise TypeError(f"expected EventRecord, got {type(ev).__name__}")
            if self.kind(ev.event_type) is None:
                self.register_stream(ev.event_type, "event")
            elif self.kind(ev.event_type) != "event":
                raise KindMismatch(f"{ev.event_type!r} is a data stream, not an event type")
            if self._insert_event(ev):
                written.append(ev)
        by_type: dict = {}
        for ev in written:
            by_type.setdefault(ev.event_type, []).append(json.dumps(ev.to_json(), sort_keys=True))
            self._note_times(ev.event_type, ev.start, ev.start)
        for etype, lines in by_type.items():
            self._append_lines(("events", f"{etype}.jsonl"), lines)
            self._trigger(etype)
        return len(written)

    def query_events(self, event_type: str, window: Window) -> list:
        """Events of ``event_type`` whose interval intersects ``window``."""
        lst = self._events.get(self.resolve(event_type), [])
        return [e for e in lst if e.start < window.end and e.end > window.start]

    def event_types(self) -> list:
        return sorted(k for k, v in self.registry.items() if v.kind == "event")

    # -- stations --------------------------------------------------------

    def set_stations(self, table: StationTable):
        self.stations = table
        if self.path is None:
            return
        d = self._file("stations")
        d.mkdir(exist_ok=True)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["station_id", "lat", "lon"])
        for s in table.stations:
            w.writerow([s.station_id, repr(s.latitude), repr(s.longitude)])
        (d / "stations.csv").write_text(buf.getvalue(), encoding="utf-8")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["station_id", "timestamp", "pm25_ugm3"])
        for s in table.stations:
            for r in table.readings(s.station_id):
                w.writerow([r.station_id, format_timestamp(r.timestamp), repr(r.pm25)])
        (d / "readings.csv").write_text(buf.getvalue(), encoding="utf-8")

    # -- definitions and continuous evaluation ---------------------------

    def definition_plan(self, name: str):
        return self._plans.get(name)

    @property
    def definitions(self) -> dict:
        return dict(self._definitions)

    def register_definition(self, definition: dsl.Definition):
        """Compile ``definition`` against this store and register it for ``advance``."""
        if definition.name in self._definitions:
            raise DuplicateDefinition(f"definition {definition.name!r} is already registered")
        if self.kind(definition.name) not in (None, "event"):
            raise DuplicateDefinition(f"{definition.name!r} already names a data stream")
        plan = self._install_definition(definition, persist=True)
        return plan

    def _install_definition(self, definition: dsl.Definition, persist: bool):
        from .plan import compile as compile_plan

        plan = compile_plan(definition, self)
        self._definitions[definition.name] = definition
        self._definition_text[definition.name] = dsl.format(definition)
        self._plans[definition.name] = plan
        self._continuous[definition.name] = ContinuousState()
        if self.kind(definition.name) is None:
            self.registry[definition.name] = StreamInfo("event", "event")
            self._events.setdefault(definition.name, [])
            self._event_keys.setdefault(definition.name, set())
        if persist:
            self._save_registry()
        return plan

    def _trigger(self, stream_id: str):
        for name, plan in self._plans.items():
            if stream_id in plan.inputs and name not in self.scheduled:
                self.scheduled.append(name)

    def continuous_state(self, name: str) -> ContinuousState:
        return self._continuous[name]

    def advance(
        self,
        samples: Mapping[str, object] | None = None,
        events: Iterable[EventRecord] = (),
        source: str | None = None,
    ) -> list:
        """Ingest one increment and emit newly finalized events.

        Each registered definition is re-evaluated from its last finalized
        point (or the start of its still-open interval) up to
        ``watermark - lookback``; intervals that end strictly before that
        frontier are final and are persisted under the definition's name.
        An interval touching the frontier stays open until a later call.
        """
        from .plan import EvalContext, records_for
        from . import algebra

        before = self.watermark()
        for sid, batch in (samples or {}).items():
            self.append_samples(sid, batch, source=source)
        self.append_events(events)
        after = self.watermark()
        if after is not None and (before is None or after > before):
            for name in self._plans:
                if name not in self.scheduled:
                    self.scheduled.append(name)
        emitted = []
        while self.scheduled:
            name = self.scheduled.popleft()
            plan = self._plans[name]
            state = self._continuous[name]
            if after is None:
                continue
            if state.origin is None:
                state.origin = self.first_timestamp
                state.frontier = state.origin
            new_frontier = after - plan.lookback
            if new_frontier <= state.frontier:
                continue
            start = state.pending_start if state.pending_start is not None else state.frontier
            window = Window(start, new_frontier)
            ctx = EvalContext(self, plan.config, window.expand(plan.lookback))
            result = algebra.clip(plan.root.run(ctx), window)
            pending = None
            if len(result) and int(result.ends[-1]) == new_frontier:
                pending = int(result.starts[-1])
                result = type(result)._raw(result.starts[:-1], result.ends[:-1])
            records = records_for(plan, result, ctx.leaf_sets)
            state.frontier = new_frontier
            state.pending_start = pending
            for rec in records:
                if self._insert_event(rec):
                    emitted.append(rec)
                    self._append_lines(
                        ("events", f"{rec.event_type}.jsonl"), [json.dumps(rec.to_json(), sort_keys=True)]
                    )
        self._save_registry()
        return emitted

    def close(self):
        self._save_registry()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
