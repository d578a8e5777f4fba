import json
import random
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from healthcep import Store, dsl
from healthcep.algebra import Window
from healthcep.errors import DataError, DuplicateDefinition, KindMismatch, UnknownStream
from healthcep.model import EventRecord, Interval, LocationSample, Sample, Series
from fixtures import T0, Day


def hr(t, v, src="a"):
    return Sample(T0 + t, v, "bpm", src)


@pytest.fixture
def hr_store():
    s = Store(None)
    s.register_stream("Heartrate", "real", "bpm")
    return s


class TestSamples:
    def test_idempotent(self, hr_store):
        xs = [hr(0, 60), hr(1, 61), hr(2, 62)]
        assert hr_store.append_samples("Heartrate", xs) == 3
        assert hr_store.append_samples("Heartrate", xs) == 0

    def test_unknown_stream(self, hr_store):
        with pytest.raises(UnknownStream):
            hr_store.append_samples("Nope", [hr(0, 1)])

    def test_kind_mismatch(self, hr_store):
        hr_store.register_stream("Location", "location")
        with pytest.raises(KindMismatch):
            hr_store.append_samples("Location", [hr(0, 1)])
        with pytest.raises(KindMismatch):
            hr_store.register_stream("Heartrate", "event")

    def test_unit_mismatch(self, hr_store):
        with pytest.raises(DataError):
            hr_store.append_samples("Heartrate", [Sample(T0, 1, "W", "a")])

    def test_non_finite_series(self, hr_store):
        with pytest.raises(DataError):
            hr_store.append_samples("Heartrate", Series([T0], [np.nan], "bpm"), "a")

    def test_same_time_different_source_kept(self, hr_store):
        assert hr_store.append_samples("Heartrate", [hr(0, 60, "a"), hr(0, 60, "b")]) == 2

    def test_empty_overlap(self, hr_store):
        hr_store.append_samples("Heartrate", [hr(0, 60)])
        assert hr_store.query_samples("Heartrate", Window(T0 + 10, T0 + 20)) == []

    def test_interleaved_out_of_order(self, hr_store):
        rng = random.Random(1)
        expected = {}
        for _ in range(20):
            batch = [hr(rng.randrange(5000), float(rng.randrange(50, 180)), rng.choice("ab")) for _ in range(50)]
            hr_store.append_samples("Heartrate", batch)
            for x in batch:
                expected.setdefault((x.timestamp, x.source), x)
        got = hr_store.query_samples("Heartrate", Window(T0 - 1, T0 + 6000))
        oracle = sorted(expected.values(), key=lambda x: (x.timestamp, x.source))
        assert got == oracle
        for _ in range(50):
            a = T0 + rng.randrange(-100, 5100)
            b = a + rng.randrange(1, 2000)
            assert hr_store.query_samples("Heartrate", Window(a, b)) == [x for x in oracle if a <= x.timestamp < b]

    def test_watermark(self, hr_store):
        assert hr_store.watermark() is None
        hr_store.append_samples("Heartrate", [hr(5, 60), hr(2, 60)])
        assert hr_store.watermark("Heartrate") == T0 + 6
        hr_store.append_samples("Heartrate", [hr(1, 61)])
        assert hr_store.watermark("HR") == T0 + 6

    def test_location_round_trip(self, tmp_path):
        s = Store(tmp_path)
        s.register_stream("Location", "location")
        xs = [LocationSample(T0 + k, 33.6 + k * 1e-4, -117.8, "gps") for k in range(5)]
        assert s.append_samples("Location", xs) == 5
        assert Store(tmp_path).query_samples("Location", Window(T0, T0 + 10)) == xs


class TestEvents:
    def test_dedup_and_invalid(self, mem_store):
        ev = EventRecord("Cycling", "ride", Interval(T0, T0 + 600))
        assert mem_store.append_events([ev]) == 1
        assert mem_store.append_events([ev]) == 0
        with pytest.raises(ValueError):
            mem_store.append_events([EventRecord("Cycling", "x", Interval(T0, T0))])

    def test_query_events_oracle(self, mem_store):
        rng = random.Random(2)
        evs = []
        for i in range(200):
            s = T0 + rng.randrange(100_000)
            evs.append(EventRecord("Run", f"r{i}", Interval(s, s + rng.randrange(1, 5000))))
        mem_store.append_events(evs)
        assert mem_store.query_events("Run", Window(T0 - 10, T0 - 5)) == []
        assert len(mem_store.query_events("Run", Window(T0 - 1, T0 + 200_000))) == 200
        for _ in range(50):
            a = T0 + rng.randrange(100_000)
            w = Window(a, a + rng.randrange(1, 20_000))
            got = mem_store.query_events("Run", w)
            expected = sorted((e for e in evs if e.start < w.end and e.end > w.start), key=lambda e: (e.start, e.end, e.event_name))
            assert got == expected

    def test_event_wakes_definition(self, mem_store):
        mem_store.register_stream("Altitude", "real", "m")
        mem_store.register_stream("Cycling", "event")
        (d,) = dsl.parse("UphillCycle := Cycling AND detect-climb(Altitude)")
        mem_store.register_definition(d)
        assert list(mem_store.scheduled) == []
        mem_store.append_events([EventRecord("Cycling", "ride", Interval(T0, T0 + 600))])
        assert list(mem_store.scheduled) == ["UphillCycle"]
        mem_store.append_events([EventRecord("Cycling", "ride2", Interval(T0 + 900, T0 + 1200))])
        assert list(mem_store.scheduled) == ["UphillCycle"]

    def test_duplicate_definition(self, mem_store):
        mem_store.register_stream("Heartrate", "real", "bpm")
        (d,) = dsl.parse("V := HR > 140")
        mem_store.register_definition(d)
        with pytest.raises(DuplicateDefinition):
            mem_store.register_definition(d)


class TestAdvance:
    def setup_store(self):
        s = Store(None)
        s.register_stream("Heartrate", "real", "bpm")
        s.register_stream("Nap", "event")
        (d,) = dsl.parse("X := (HR > 140) OR DELAY(Nap, 1h)")
        s.register_definition(d)
        return s

    @staticmethod
    def hr_series(a, b):
        t = np.arange(T0 + a, T0 + b)
        v = np.where((t >= T0 + 1000) & (t < T0 + 1600), 150.0, 80.0)
        return Series(t, v, "bpm")

    def test_no_qualifying_data(self):
        s = self.setup_store()
        assert s.advance({"Heartrate": Series(np.arange(T0, T0 + 900), np.full(900, 80.0), "bpm")}) == []

    def test_withheld_then_emitted(self):
        s = self.setup_store()
        assert s.definition_plan("X").lookback == 3600
        # watermark 3400: the run ending at 1600 is 30 min old, inside the lookback
        assert s.advance({"Heartrate": self.hr_series(0, 3400)}, source="w") == []
        out = s.advance({"Heartrate": self.hr_series(3400, 5300)}, source="w")
        assert [(e.start - T0, e.end - T0) for e in out] == [(1000, 1600)]
        assert s.query_events("X", Window(T0, T0 + 10_000)) == out
        assert s.advance({"Heartrate": self.hr_series(5300, 9000)}, source="w") == []

    def test_pending_interval_not_split(self):
        s = self.setup_store()
        # frontier lands inside the run: 1300 = 4900 - 3600
        s.advance({"Heartrate": self.hr_series(0, 4900)}, source="w")
        assert s.continuous_state("X").pending_start == T0 + 1000
        out = s.advance({"Heartrate": self.hr_series(4900, 6000)}, source="w")
        assert [(e.start - T0, e.end - T0) for e in out] == [(1000, 1600)]

    def test_persisted_state_survives_reopen(self, tmp_path):
        s = Store(tmp_path)
        s.register_stream("Heartrate", "real", "bpm")
        (d,) = dsl.parse("V := HR > 140")
        s.register_definition(d)
        s.advance({"Heartrate": TestAdvance.hr_series(0, 1300)}, source="w")
        s.close()
        s2 = Store(tmp_path)
        assert s2.continuous_state("V").pending_start == T0 + 1000
        out = s2.advance({"Heartrate": TestAdvance.hr_series(1300, 3000)}, source="w")
        assert [(e.start - T0, e.end - T0) for e in out] == [(1000, 1600)]
        assert Store(tmp_path).advance({"Heartrate": TestAdvance.hr_series(1300, 3000)}, source="w") == []


class TestPersistence:
    def test_reopen(self, tmp_path):
        s = Day().load(Store(tmp_path))
        s.close()
        s2 = Store(tmp_path)
        w = Window(T0, T0 + 86400)
        for sid in ("Heartrate", "Power", "Altitude"):
            a, b = s.query_series(sid, w), s2.query_series(sid, w)
            assert np.array_equal(a.times, b.times) and np.array_equal(a.values, b.values)
        assert s2.query_events("Cycling", w) == s.query_events("Cycling", w)
        assert s2.watermark() == s.watermark()

    def test_partial_line_truncated(self, tmp_path):
        s = Store(tmp_path)
        s.register_stream("Heartrate", "real", "bpm")
        s.append_samples("Heartrate", [hr(k, 60 + k) for k in range(10)])
        s.append_events([EventRecord("Run", "r", Interval(T0, T0 + 5))])
        for name in ("streams/Heartrate.csv", "events/Run.jsonl"):
            with open(tmp_path / name, "a") as fh:
                fh.write("2019-06-01T00:0")
        s2 = Store(tmp_path)
        assert s2.sample_count("Heartrate") == 10
        assert len(s2.query_events("Run", Window(T0, T0 + 10))) == 1
        assert (tmp_path / "streams/Heartrate.csv").read_text().endswith("\n")
        assert s2.append_samples("Heartrate", [hr(20, 70)]) == 1
        assert Store(tmp_path).sample_count("Heartrate") == 11

    def test_registry_json(self, tmp_path):
        s = Store(tmp_path)
        s.register_stream("Heartrate", "real", "bpm")
        (d,) = dsl.parse("V := HR > 140")
        s.register_definition(d)
        reg = json.loads((tmp_path / "registry.json").read_text())
        assert reg["streams"]["Heartrate"]["unit"] == "bpm"
        assert reg["definitions"]["V"] == "V := HR > 140"
        assert Store(tmp_path).definitions == {"V": d}
