"""Location x monitoring-station join producing PM2.5 concentration streams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, UnsortedInput
from .model import LocationSample, Series, Timestamp, to_timestamp
from .physio import CONCENTRATION

EARTH_RADIUS_KM = 6371.0
DEFAULT_MAX_KM = 50.0
HOUR = 3600


def haversine_km(a, b) -> float:
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    h = math.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def _haversine_many(lat, lon, lats, lons) -> np.ndarray:
    lat1, lon1 = math.radians(lat), math.radians(lon)
    lat2, lon2 = np.radians(lats), np.radians(lons)
    h = np.sin((lat2 - lat1) / 2) ** 2 + math.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))


@dataclass(frozen=True)
class Station:
    station_id: str
    latitude: float
    longitude: float

    def __post_init__(self):
        if not self.station_id:
            raise DataError("station_id must be non-empty")
        if not (-90 <= self.latitude <= 90 and -180 <= self.longitude <= 180):
            raise DataError(f"station {self.station_id}: coordinates out of range")


@dataclass(frozen=True)
class StationReading:
    station_id: str
    timestamp: Timestamp
    pm25: float

    def __post_init__(self):
        object.__setattr__(self, "timestamp", to_timestamp(self.timestamp))
        if not math.isfinite(self.pm25) or self.pm25 < 0:
            raise DataError(f"station {self.station_id}: invalid pm25 {self.pm25!r}")


class StationTable:
    """Stations plus hourly PM2.5 readings, immutable after construction.

    Readings are keyed by the hour they fall in; a later reading for the same
    station-hour replaces an earlier one.
    """

    def __init__(self, stations: Iterable[Station], readings: Iterable[StationReading] = ()):
        self.stations = tuple(sorted(stations, key=lambda s: s.station_id))
        ids = [s.station_id for s in self.stations]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate station_id")
        self._index = {sid: i for i, sid in enumerate(ids)}
        self._lats = np.array([s.latitude for s in self.stations], dtype=float)
        self._lons = np.array([s.longitude for s in self.stations], dtype=float)
        hourly: dict = {sid: {} for sid in ids}
        for r in readings:
            if r.station_id not in hourly:
                raise DataError(f"reading references unknown station {r.station_id!r}")
            hourly[r.station_id][r.timestamp - r.timestamp % HOUR] = r.pm25
        self._hours = {}
        self._values = {}
        for sid, by_hour in hourly.items():
            hours = sorted(by_hour)
            self._hours[sid] = np.array(hours, dtype=np.int64)
            self._values[sid] = np.array([by_hour[h] for h in hours], dtype=float)

    def __len__(self) -> int:
        return len(self.stations)

    def station(self, station_id: str) -> Station:
        return self.stations[self._index[station_id]]

    def readings(self, station_id: str) -> list:
        return [
            StationReading(station_id, int(h), float(v))
            for h, v in zip(self._hours[station_id], self._values[station_id])
        ]

    @property
    def reading_count(self) -> int:
        return sum(len(h) for h in self._hours.values())

    def nearest(self, lat: float, lon: float, max_km: float = DEFAULT_MAX_KM):
        if not self.stations:
            return None
        d = _haversine_many(lat, lon, self._lats, self._lons)
        i = int(np.argmin(d))  # stations are sorted by id, so ties go to the smallest id
        if d[i] > max_km:
            return None
        return self.stations[i]

    def reading_at(self, station_id: str, t: Timestamp):
        hours = self._hours[station_id]
        hour = t - t % HOUR
        i = int(np.searchsorted(hours, hour))
        if i < len(hours) and hours[i] == hour:
            return float(self._values[station_id][i])
        return None


def nearest_station(p, table: StationTable, max_km: float = DEFAULT_MAX_KM):
    return table.nearest(p[0], p[1], max_km)


def concentration_stream(
    loc: Sequence[LocationSample], table: StationTable, max_km: float = DEFAULT_MAX_KM
) -> Series:
    """PM2.5 at each location sample from the nearest station's hourly reading."""
    times, values = [], []
    last = None
    for sample in loc:
        if last is not None and sample.timestamp < last:
            raise UnsortedInput("location samples must be sorted by timestamp")
        last = sample.timestamp
        station = table.nearest(sample.latitude, sample.longitude, max_km)
        if station is None:
            continue
        value = table.reading_at(station.station_id, sample.timestamp)
        if value is None:
            continue
        times.append(sample.timestamp)
        values.append(value)
    return Series(np.array(times, dtype=np.int64), np.array(values, dtype=float), CONCENTRATION)

