"""Synthetic data with planted ground truth."""

import csv

import numpy as np

from healthcep.model import EventRecord, Interval, Series, format_timestamp, to_timestamp

T0 = to_timestamp("2019-06-01T00:00:00Z")
H = 3600


def at(hh, mm=0, ss=0, day=0):
    return T0 + day * 86400 + hh * H + mm * 60 + ss


class Day:
    """One day of 1 Hz heart rate plus a one-hour ride with power and altitude.

    Planted ground truth:
      * HR > 140 runs at 08:00-08:20 and 18:00-18:45
      * a 30 s HR spike (70 -> 115 bpm) at 12:00
      * a ride 15:00-16:00 with a 20 s 450 W burst at 15:10 and a
        0.4 m/s climb 15:30-15:40
    """

    hr_runs = [(at(8), at(8, 20)), (at(18), at(18, 45))]
    spike = (at(12), at(12, 0, 30))
    ride = (at(15), at(16))
    burst = (at(15, 10), at(15, 10, 20))
    climb = (at(15, 30), at(15, 40))

    def __init__(self, seed=0):
        rng = np.random.default_rng(seed)
        self.t = np.arange(T0, T0 + 86400, dtype=np.int64)
        hr = 70 + rng.integers(-3, 4, len(self.t)).astype(float)
        for s, e in self.hr_runs:
            # gradual warm-up to 139 bpm, so the run onset is not spike-shaped
            hr[s - T0 - 480 : s - T0] = np.linspace(70, 139, 480)
            hr[s - T0 : e - T0] = 150 + rng.integers(-3, 4, e - s)
        s, e = self.spike
        hr[s - T0 : e - T0] = 115
        s, e = self.ride
        hr[s - T0 : e - T0] = 120 + rng.integers(-3, 4, e - s)
        hr[s - T0 : s - T0 + 300] = np.linspace(70, 120, 300)
        self.hr = hr
        self.ride_t = np.arange(*self.ride, dtype=np.int64)
        power = np.full(len(self.ride_t), 200.0)
        b0, b1 = (x - self.ride[0] for x in self.burst)
        power[b0:b1] = 450.0
        self.power = power
        c0, c1 = (x - self.ride[0] for x in self.climb)
        alt = np.full(len(self.ride_t), 100.0)
        alt[c0:c1] = 100.0 + 0.4 * np.arange(c1 - c0)
        alt[c1:] = 100.0 + 0.4 * (c1 - c0)
        self.alt = alt

    def series(self):
        return {
            "Heartrate": Series(self.t, self.hr, "bpm"),
            "Power": Series(self.ride_t, self.power, "W"),
            "Altitude": Series(self.ride_t, self.alt, "m"),
        }

    def events(self):
        return [EventRecord("Cycling", "Afternoon Ride", Interval(*self.ride), {"source": "strava"})]

    def load(self, store, source="fixture"):
        for sid, unit in (("Heartrate", "bpm"), ("Power", "W"), ("Altitude", "m")):
            store.register_stream(sid, "real", unit)
        for sid, s in self.series().items():
            store.append_samples(sid, s, source=source)
        store.append_events(self.events())
        return store


# -- file writers ----------------------------------------------------------------


def write_exercise_csv(path, blocks):
    """``blocks``: list of (type, name, start, end, rows); rows are dicts keyed by column."""
    cols = ["timestamp", "heartrate_bpm", "power_w", "cadence_rpm", "altitude_m", "lat", "lon"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for etype, name, start, end, rows in blocks:
            w.writerow(["#activity", etype, name, format_timestamp(start), format_timestamp(end)])
            w.writerow(cols)
            for r in rows:
                w.writerow([format_timestamp(r["t"])] + [r.get(c, "") for c in cols[1:]])


def write_health_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "stream", "value", "unit"])
        for t, stream, value, unit in rows:
            w.writerow([format_timestamp(t), stream, value, unit])


def write_location_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp", "lat", "lon", "source"])
        for t, lat, lon, src in rows:
            w.writerow([format_timestamp(t), lat, lon, src])


def write_stations(spath, rpath, stations, readings):
    with open(spath, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["station_id", "lat", "lon"])
        w.writerows(stations)
    with open(rpath, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["station_id", "timestamp", "pm25_ugm3"])
        for sid, t, v in readings:
            w.writerow([sid, format_timestamp(t), v])


def ride_rows(start, seconds, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(seconds):
        rows.append(
            {
                "t": start + k,
                "heartrate_bpm": int(110 + rng.integers(0, 20)),
                "power_w": int(180 + rng.integers(0, 60)),
                "cadence_rpm": int(85 + rng.integers(0, 10)),
                "altitude_m": f"{100 + 0.1 * k:.1f}",
                "lat": f"{33.64 + k * 1e-5:.6f}",
                "lon": f"{-117.84 + k * 1e-5:.6f}",
            }
        )
    return rows


class Month:
    """``days`` days of 10 s heart rate; each day has one HR > 140 run, one
    HR spike and one ride carrying a power burst and a climb.  Start times
    vary from day to day."""

    period = 10

    def __init__(self, days=30, seed=1):
        rng = np.random.default_rng(seed)
        n = days * 86400 // self.period
        self.t = T0 + self.period * np.arange(n, dtype=np.int64)
        hr = 70 + rng.integers(-3, 4, n).astype(float)
        ride_t, power, alt = [], [], []
        self.rides = []
        for d in range(days):
            base = d * 8640  # sample index of midnight
            run = base + int(rng.integers(2000, 3000))
            hr[run - 48 : run] = np.linspace(70, 139, 48)
            hr[run : run + int(rng.integers(60, 240))] = 150
            spike = base + int(rng.integers(4000, 4500))
            hr[spike : spike + 3] = 115
            # a ride starting 100 to 600 samples after the spike, so the spike
            # delayed by an hour lands inside the ride on some days only
            r0 = spike + int(rng.integers(100, 600))
            hr[r0 : r0 + 360] = 120 + rng.integers(-3, 4, 360)
            hr[r0 : r0 + 30] = np.linspace(70, 120, 30)
            rt = self.t[r0 : r0 + 360]
            p = np.full(360, 200.0)
            b = int(rng.integers(30, 300))
            p[b : b + 2] = 450.0
            a = np.full(360, 100.0)
            c = int(rng.integers(60, 250))
            a[c : c + 60] = 100.0 + 4.0 * np.arange(60)  # 0.4 m/s
            a[c + 60 :] = a[c + 59]
            ride_t.append(rt)
            power.append(p)
            alt.append(a)
            self.rides.append(EventRecord("Cycling", f"Ride {d + 1}", Interval(int(rt[0]), int(rt[-1]) + self.period)))
        self.hr = hr
        self.ride_t = np.concatenate(ride_t)
        self.power = np.concatenate(power)
        self.alt = np.concatenate(alt)

    def streams(self):
        return {
            "Heartrate": Series(self.t, self.hr, "bpm"),
            "Power": Series(self.ride_t, self.power, "W"),
            "Altitude": Series(self.ride_t, self.alt, "m"),
        }

    @property
    def end(self):
        return int(self.t[-1]) + self.period

    def chunks(self, cuts):
        """Split everything at the sorted timestamps ``cuts``.

        Each chunk carries the samples in its span and the rides starting in
        it, so no activity arrives after data past its start."""
        edges = [int(self.t[0])] + list(cuts) + [self.end]
        out = []
        for lo, hi in zip(edges, edges[1:]):
            samples = {}
            for sid, s in self.streams().items():
                i, j = np.searchsorted(s.times, [lo, hi])
                if j > i:
                    samples[sid] = Series(s.times[i:j], s.values[i:j], s.unit)
            events = [e for e in self.rides if lo <= e.start < hi]
            out.append((samples, events))
        return out

    def register(self, store):
        for sid, unit in (("Heartrate", "bpm"), ("Power", "W"), ("Altitude", "m")):
            store.register_stream(sid, "real", unit)
        store.register_stream("Cycling", "event")
        return store
