import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from healthcep import detectors
from healthcep.algebra import and_, or_
from healthcep.detectors import (
    ClimbSpec,
    SpikeSpec,
    ThresholdSpec,
    detect_climb,
    detect_spike,
    events_to_intervalset,
    extend_intervals,
    held_support,
    threshold_events,
)
from healthcep.errors import UnitMismatch, UnsortedInput
from healthcep.model import EventRecord, Interval, Sample, Series
import oracles


def series(times, values, unit="bpm"):
    return Series(np.array(times, np.int64), np.array(values, float), unit)


def canonical(s):
    assert np.all(s.starts < s.ends)
    assert np.all(s.ends[:-1] < s.starts[1:])


# sorted sample times with possible gaps, values in a small range
samples = st.lists(st.tuples(st.integers(0, 3), st.integers(60, 180)), max_size=60).map(
    lambda xs: (list(np.cumsum([d for d, _ in xs]).tolist()), [float(v) for _, v in xs])
)
gappy = st.lists(st.tuples(st.integers(0, 150), st.integers(60, 180)), max_size=40).map(
    lambda xs: (list(np.cumsum([d for d, _ in xs]).tolist()), [float(v) for _, v in xs])
)


class TestThreshold:
    def test_hold_example(self):
        s = series(range(5), [100, 130, 135, 125, 110])
        assert threshold_events(s, ThresholdSpec("HR", ">", 120)).pairs() == [(1, 4)]

    def test_empty(self):
        assert threshold_events(series([], []), ThresholdSpec("HR", ">", 120)).pairs() == []

    def test_accepts_sample_list(self):
        xs = [Sample(t, v, "bpm", "a") for t, v in zip(range(3), [150, 150, 90])]
        assert threshold_events(xs, ThresholdSpec("HR", ">", 120)).pairs() == [(0, 2)]

    def test_unit_mismatch(self):
        with pytest.raises(UnitMismatch):
            threshold_events(series([0], [1], "W"), ThresholdSpec("HR", ">", 1, unit="bpm"))

    def test_unsorted(self):
        with pytest.raises(UnsortedInput):
            threshold_events(series([5, 1], [1, 1]), ThresholdSpec("HR", ">", 0))

    def test_gap_cap_and_widening(self):
        s = series([0, 200], [150, 150])
        assert threshold_events(s, ThresholdSpec("HR", ">", 120, max_gap=60)).pairs() == [(0, 60), (200, 260)]
        # max_gap 0 still gives each sample one second
        assert threshold_events(s, ThresholdSpec("HR", ">", 120, max_gap=0)).pairs() == [(0, 1), (200, 201)]

    def test_min_duration(self):
        s = series(range(10), [150] * 3 + [100] * 2 + [150] * 5)
        spec = ThresholdSpec("HR", ">", 120, min_duration=4, max_gap=1)
        assert threshold_events(s, spec).pairs() == [(5, 10)]

    def test_unicode_ops(self):
        assert ThresholdSpec("HR", "≥", 1).op == ">="
        with pytest.raises(ValueError):
            ThresholdSpec("HR", "==", 1)

    @given(gappy, st.sampled_from([">", ">=", "<", "<="]), st.integers(60, 180), st.integers(0, 90))
    def test_matches_grid_oracle(self, tv, op, v, gap):
        times, values = tv
        pred = {">": lambda x: x > v, ">=": lambda x: x >= v, "<": lambda x: x < v, "<=": lambda x: x <= v}[op]
        got = threshold_events(series(times, values), ThresholdSpec("HR", op, v, max_gap=gap))
        canonical(got)
        assert got.pairs() == oracles.threshold_grid(times, values, pred, gap)

    def test_large_random_matches_oracle(self):
        rng = np.random.default_rng(7)
        times = np.cumsum(rng.integers(1, 5, 10_000))
        values = rng.integers(90, 160, 10_000).astype(float)
        got = threshold_events(series(times, values), ThresholdSpec("HR", ">", 120, max_gap=2))
        # per-second oracle on held values, vectorised over the grid
        grid_t = np.arange(times[0], times[-1] + 3)
        idx = np.searchsorted(times, grid_t, side="right") - 1
        held = (grid_t < times[idx] + 2) & (values[idx] > 120)
        assert got.pairs() == oracles.runs(held.tolist(), int(grid_t[0]))

    @given(gappy, st.integers(60, 180), st.integers(0, 90))
    def test_partition(self, tv, v, gap):
        s = series(*tv)
        above = threshold_events(s, ThresholdSpec("HR", ">", v, max_gap=gap))
        below = threshold_events(s, ThresholdSpec("HR", "<=", v, max_gap=gap))
        assert and_(above, below).pairs() == []
        assert or_(above, below) == held_support(s, gap)

    @given(gappy, st.data())
    def test_coverage_monotone(self, tv, data):
        times, values = tv
        spec = ThresholdSpec("HR", ">", 120, max_gap=30)
        before = threshold_events(series(times, values), spec)
        runs = before.pairs()
        if not runs:
            return
        s, e = data.draw(st.sampled_from(runs))
        extra = sorted(set(data.draw(st.lists(st.integers(s, e - 1), max_size=5))) - set(times))
        merged = sorted(zip(times + extra, values + [150.0] * len(extra)))
        after = threshold_events(series([t for t, _ in merged], [v for _, v in merged]), spec)
        assert and_(before, after) == before


class TestSpike:
    def test_constant(self):
        assert detect_spike(series(range(600), [80] * 600)).pairs() == []

    def test_short_excursion(self):
        hr = [80.0] * 600
        hr[300:330] = [120.0] * 30
        got = detect_spike(series(range(600), hr))
        assert got.pairs() == oracles.spike_oracle(list(range(600)), hr) == [(300, 330)]

    def test_step_is_not_a_spike(self):
        hr = [80.0] * 300 + [150.0] * 600
        assert detect_spike(series(range(900), hr)).pairs() == []
        assert oracles.spike_oracle(list(range(900)), hr) == []

    @given(st.lists(st.tuples(st.integers(1, 20), st.sampled_from([80, 85, 90, 120, 140])), max_size=80))
    def test_matches_oracle(self, xs):
        times = np.cumsum([d for d, _ in xs]).tolist()
        values = [float(v) for _, v in xs]
        got = detect_spike(series(times, values))
        canonical(got)
        assert got.pairs() == oracles.spike_oracle(times, values)

    def test_params_positive(self):
        with pytest.raises(ValueError):
            SpikeSpec(delta=0)


class TestClimb:
    def test_flat(self):
        assert detect_climb(series(range(300), [100] * 300, "m")).pairs() == []

    def test_ramp(self):
        alt = [0.0] * 50 + [float(i) for i in range(101)] + [100.0] * 50
        t = list(range(len(alt)))
        got = detect_climb(series(t, alt, "m")).pairs()
        assert got == oracles.climb_oracle(t, alt)
        assert len(got) == 1
        s, e = got[0]
        assert abs(s - 50) <= 15 and abs(e - 150) <= 15

    def test_gentle_ramp_rejected(self):
        alt = [0.05 * i for i in range(101)]
        assert detect_climb(series(range(101), alt, "m")).pairs() == []

    @given(st.lists(st.tuples(st.integers(1, 40), st.floats(-3, 3)), max_size=60))
    def test_matches_oracle(self, xs):
        times = np.cumsum([d for d, _ in xs]).tolist()
        alt = np.cumsum([v for _, v in xs]).tolist()
        got = detect_climb(series(times, alt, "m"), ClimbSpec(min_total_gain=3.0))
        canonical(got)
        assert got.pairs() == oracles.climb_oracle(times, alt, min_gain=3.0)


class TestEvents:
    def test_union(self):
        evs = [EventRecord("Cycling", "a", Interval(0, 3600)), EventRecord("Cycling", "b", Interval(1800, 5400))]
        assert events_to_intervalset(evs, "Cycling").pairs() == [(0, 5400)]
        assert events_to_intervalset(evs, "Running").pairs() == []

    @given(st.lists(st.tuples(st.integers(0, 900), st.integers(1, 100)), max_size=50))
    def test_grid_union(self, xs):
        evs = [EventRecord("E", str(i), Interval(s, s + d)) for i, (s, d) in enumerate(xs)]
        assert events_to_intervalset(evs, "E").pairs() == oracles.grid_union([(s, s + d) for s, d in xs])

    def test_extend(self):
        s = events_to_intervalset([EventRecord("E", "", Interval(0, 10)), EventRecord("E", "", Interval(20, 30))], "E")
        assert extend_intervals(s, 10).pairs() == [(0, 40)]


def test_detector_spec_overrides():
    spec = detectors.detector_spec("detect-spike", SpikeSpec(), delta=30, baseline_window=60.0)
    assert spec.delta == 30.0 and spec.baseline_window == 60 and isinstance(spec.baseline_window, int)
    with pytest.raises(TypeError):
        detectors.detector_spec("detect-spike", None, nope=1)
