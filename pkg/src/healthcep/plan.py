"""Compile pattern definitions into evaluation plans and run them.

Every plan node knows its *locality*: the truth of the node at time ``t``
depends only on input data inside ``[t - locality, t + locality]``.  The
plan's ``lookback`` is the root locality; :func:`evaluate` reads that much
extra data on both sides of the query window, so evaluating over a window
gives the same answer as evaluating over all time and clipping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import algebra, detectors, dsl, physio
from .algebra import Window
from .config import Config
from .errors import AmbiguousReference, UnitMismatch, UnresolvedReference
from .exposome import concentration_stream
from .model import EventRecord, Interval, IntervalSet, Series

HEARTRATE = "Heartrate"
ALTITUDE = "Altitude"
LOCATION = "Location"


# -- derived streams ---------------------------------------------------------


@dataclass(frozen=True)
class DerivedStream:
    name: str
    unit: str
    inputs: tuple
    build: Callable
    needs_stations: bool = False
    uses_hold: bool = False

    def locality(self, config: Config) -> int:
        return config.max_gap if self.uses_hold else 0


def _conc(ctx) -> Series:
    return concentration_stream(ctx.locations(LOCATION), ctx.store.stations, ctx.config.max_km)


def _intake(ctx) -> Series:
    hr = ctx.series(HEARTRATE)
    p = ctx.config.profile
    return physio.pm25_intake_rate(
        physio.breathing_rate(hr, p), physio.tidal_volume(hr, p), ctx.derived("PM25"), ctx.config.max_gap
    )


DERIVED = {
    d.name: d
    for d in (
        DerivedStream("PM25", physio.CONCENTRATION, (LOCATION,), _conc, needs_stations=True),
        DerivedStream(
            "BreathingRate",
            physio.BREATHS_PER_MIN,
            (HEARTRATE,),
            lambda ctx: physio.breathing_rate(ctx.series(HEARTRATE), ctx.config.profile),
        ),
        DerivedStream(
            "TidalVolume",
            physio.LITERS,
            (HEARTRATE,),
            lambda ctx: physio.tidal_volume(ctx.series(HEARTRATE), ctx.config.profile),
        ),
        DerivedStream(
            "PM25Intake", physio.INTAKE, (HEARTRATE, LOCATION), _intake, needs_stations=True, uses_hold=True
        ),
        DerivedStream(
            "SpO2",
            physio.PERCENT,
            (ALTITUDE,),
            lambda ctx: physio.spo2_from_altitude(ctx.series(ALTITUDE), ctx.config.spo2_anchors),
        ),
    )
}


# -- evaluation context ------------------------------------------------------


class EvalContext:
    """Per-evaluation read cache over one store and one read window."""

    def __init__(self, store, config: Config, window: Window):
        self.store = store
        self.config = config
        self.window = window
        self._series = {}
        self._locations = {}
        self._derived = {}
        self.leaf_sets = {}

    def series(self, stream_id: str) -> Series:
        if stream_id not in self._series:
            self._series[stream_id] = self.store.query_series(stream_id, self.window)
        return self._series[stream_id]

    def locations(self, stream_id: str) -> list:
        if stream_id not in self._locations:
            self._locations[stream_id] = self.store.query_samples(stream_id, self.window)
        return self._locations[stream_id]

    def derived(self, name: str) -> Series:
        if name not in self._derived:
            self._derived[name] = DERIVED[name].build(self)
        return self._derived[name]

    def source(self, ref) -> Series:
        kind, name = ref
        return self.series(name) if kind == "stream" else self.derived(name)


# -- plan nodes --------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    label: str
    locality: int
    inputs: frozenset

    def run(self, ctx: EvalContext) -> IntervalSet:
        out = self._run(ctx)
        ctx.leaf_sets[self.label] = out
        return out

    def leaves(self):
        yield self


@dataclass(frozen=True)
class ThresholdLeaf(Leaf):
    source: tuple = ()
    spec: detectors.ThresholdSpec = None

    def _run(self, ctx):
        return detectors.threshold_events(ctx.source(self.source), self.spec)


@dataclass(frozen=True)
class DetectorLeaf(Leaf):
    source: tuple = ()
    name: str = ""
    spec: object = None

    def _run(self, ctx):
        fn, _ = detectors.DETECTORS[self.name]
        return fn(ctx.source(self.source), self.spec)


@dataclass(frozen=True)
class SupportLeaf(Leaf):
    """Bare stream name: wherever the stream has held data."""

    source: tuple = ()
    max_gap: int = detectors.DEFAULT_MAX_GAP
    location: bool = False

    def _run(self, ctx):
        if self.location:
            locs = ctx.locations(self.source[1])
            series = Series(np.array([s.timestamp for s in locs], np.int64), np.zeros(len(locs)), "deg")
        else:
            series = ctx.source(self.source)
        return detectors.held_support(series, self.max_gap)


@dataclass(frozen=True)
class EventLeaf(Leaf):
    event_type: str = ""

    def _run(self, ctx):
        events = ctx.store.query_events(self.event_type, ctx.window)
        return algebra.clip(detectors.events_to_intervalset(events, self.event_type), ctx.window)


@dataclass(frozen=True)
class DefinitionLeaf(Leaf):
    """Reference to another registered definition, evaluated inline."""

    plan: "EvaluationPlan" = None

    def _run(self, ctx):
        return self.plan.root.run(ctx)


@dataclass(frozen=True)
class OpNode:
    children: tuple
    op: str
    duration: int = 0

    @property
    def locality(self) -> int:
        base = max(c.locality for c in self.children)
        return base + self.duration if self.op == "delay" else base

    @property
    def inputs(self) -> frozenset:
        return frozenset().union(*(c.inputs for c in self.children))

    def leaves(self):
        for c in self.children:
            yield from c.leaves()

    def run(self, ctx: EvalContext) -> IntervalSet:
        sets = [c.run(ctx) for c in self.children]
        if self.op == "and":
            return algebra.and_all(sets)
        if self.op == "or":
            return algebra.or_all(sets)
        if self.op == "not":
            return algebra.not_(sets[0], ctx.window)
        return algebra.delay(sets[0], self.duration, ctx.window)


@dataclass(frozen=True)
class EvaluationPlan:
    definition: dsl.Definition
    root: object
    config: Config = field(default_factory=Config, compare=False)

    @property
    def name(self) -> str:
        return self.definition.name

    @property
    def lookback(self) -> int:
        return self.root.locality

    @property
    def inputs(self) -> frozenset:
        return self.root.inputs

    def leaves(self) -> list:
        return list(self.root.leaves())


# -- compile -----------------------------------------------------------------


class _Compiler:
    def __init__(self, store, config: Config):
        self.store = store
        self.config = config

    def resolve_value_stream(self, name: str):
        """Resolve a comparison/detector operand to ``(ref, unit, locality, inputs)``."""
        sid = self.store.resolve(name)
        kind = self.store.kind(sid)
        if kind == "real":
            return ("stream", sid), self.store.unit(sid), 0, frozenset([sid])
        if kind is not None:
            raise UnresolvedReference(name, f"{kind} stream has no numeric values")
        derived = DERIVED.get(sid)
        if derived is not None:
            missing = [i for i in derived.inputs if self.store.kind(i) is None]
            if derived.needs_stations and not len(self.store.stations):
                missing.append("stations")
            if missing:
                raise UnresolvedReference(name, f"derived stream needs {', '.join(missing)}")
            return ("derived", sid), derived.unit, derived.locality(self.config), frozenset(derived.inputs)
        raise UnresolvedReference(name)

    def node(self, n):
        cfg = self.config
        label = dsl.format_node(n)
        if isinstance(n, dsl.Comparison):
            ref, unit, loc, inputs = self.resolve_value_stream(n.stream)
            if n.unit is not None and n.unit != unit:
                raise UnitMismatch(f"{label}: stream {n.stream} is in {unit!r}, not {n.unit!r}")
            spec = detectors.ThresholdSpec(
                ref[1], n.op, n.value, None, min_duration=cfg.min_duration, max_gap=cfg.max_gap
            )
            return ThresholdLeaf(label, spec.locality + loc, inputs, ref, spec)
        if isinstance(n, dsl.DetectorCall):
            ref, unit, loc, inputs = self.resolve_value_stream(n.stream)
            base = cfg.spike if n.name == "detect-spike" else cfg.climb
            spec = detectors.detector_spec(n.name, base, **dict(n.kwargs))
            return DetectorLeaf(label, spec.locality + loc, inputs, ref, n.name, spec)
        if isinstance(n, dsl.EventRef):
            return self.event_ref(n, label)
        if isinstance(n, dsl.Not):
            return OpNode((self.node(n.child),), "not")
        if isinstance(n, dsl.Delay):
            return OpNode((self.node(n.child),), "delay", n.duration)
        if isinstance(n, dsl.And):
            return OpNode(tuple(self.node(c) for c in n.children), "and")
        if isinstance(n, dsl.Or):
            return OpNode(tuple(self.node(c) for c in n.children), "or")
        raise TypeError(f"not a pattern node: {n!r}")

    def event_ref(self, n: dsl.EventRef, label: str):
        sid = self.store.resolve(n.event_type)
        kind = self.store.kind(sid)
        plan = self.store.definition_plan(sid)
        if plan is not None:
            return DefinitionLeaf(label, plan.lookback, plan.inputs, plan)
        if kind == "event":
            if sid in DERIVED:
                raise AmbiguousReference(f"{n.event_type!r} is both an event type and a derived stream")
            return EventLeaf(label, 0, frozenset([sid]), sid)
        if kind == "location":
            return SupportLeaf(label, self.config.max_gap, frozenset([sid]), ("stream", sid), self.config.max_gap, True)
        ref, _, loc, inputs = self.resolve_value_stream(n.event_type)
        return SupportLeaf(label, self.config.max_gap + loc, inputs, ref, self.config.max_gap)


def compile(definition: dsl.Definition, store, config: Config | None = None) -> EvaluationPlan:  # noqa: A001
    """Resolve every reference in ``definition`` against ``store``'s registry."""
    config = config or store.config
    root = _Compiler(store, config).node(definition.body)
    return EvaluationPlan(definition, root, config)


# -- evaluate ----------------------------------------------------------------


def evaluate_set(plan: EvaluationPlan, window: Window, store) -> IntervalSet:
    """Truth set of ``plan`` clipped to ``window``."""
    ctx = EvalContext(store, plan.config, window.expand(plan.lookback))
    return algebra.clip(plan.root.run(ctx), window)


def _coverage(leaf_sets: dict, interval: Interval) -> dict:
    span = IntervalSet._raw([interval.start], [interval.end])
    return {f"coverage:{label}": algebra.and_(s, span).total_duration() for label, s in sorted(leaf_sets.items())}


def evaluate(plan: EvaluationPlan, window: Window, store) -> list:
    """One :class:`EventRecord` per interval of the plan's truth set in ``window``."""
    ctx = EvalContext(store, plan.config, window.expand(plan.lookback))
    result = algebra.clip(plan.root.run(ctx), window)
    return records_for(plan, result, ctx.leaf_sets)


def records_for(plan: EvaluationPlan, result: IntervalSet, leaf_sets: dict) -> list:
    out = []
    for iv in result:
        params = {"definition": plan.name}
        params.update(_coverage(leaf_sets, iv))
        out.append(EventRecord(plan.name, plan.name, iv, params, plan.inputs))
    return out
