"""Plot-ready summaries of stored events: weekly totals and polar day arcs."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone

from .algebra import Window

DAY = 86400


@dataclass(frozen=True)
class WeeklyReportRow:
    iso_week: str
    event_count: int
    total_minutes: float


@dataclass(frozen=True)
class PolarRow:
    day_index: int
    start_fraction: float
    end_fraction: float
    event_type: str


def _utc(d: date) -> int:
    return int(datetime(d.year, d.month, d.day, tzinfo=timezone.utc).timestamp())


def iso_weeks(year: int) -> int:
    # Dec 28 always falls in the last ISO week of its year
    return date(year, 12, 28).isocalendar()[1]


def report_weekly(event_type: str, year: int, store) -> list:
    """Count and total duration of ``event_type`` events per ISO week of ``year``.

    Events are bucketed by the ISO week of their start; an event running into
    the next week contributes its whole duration to its start week.
    """
    first = date.fromisocalendar(year, 1, 1)
    n = iso_weeks(year)
    lo, hi = _utc(first), _utc(first + timedelta(weeks=n))
    counts = [0] * n
    seconds = [0] * n
    for ev in store.query_events(event_type, Window(lo - 366 * DAY, hi)):
        if not lo <= ev.start < hi:
            continue
        w = (ev.start - lo) // (7 * DAY)
        counts[w] += 1
        seconds[w] += ev.end - ev.start
    return [WeeklyReportRow(f"{year}-W{w + 1:02d}", counts[w], seconds[w] / 60.0) for w in range(n)]


def export_polar(event_type: str, year: int, store) -> list:
    """Day-of-year arcs of ``event_type`` events in calendar ``year``.

    Events are split at every midnight and clipped to the year, so each row
    lies within one day.  A row ending at midnight has ``end_fraction`` 1.0.
    """
    lo = _utc(date(year, 1, 1))
    hi = _utc(date(year + 1, 1, 1))
    rows = []
    for ev in store.query_events(event_type, Window(lo, hi)):
        t, end = max(ev.start, lo), min(ev.end, hi)
        while t < end:
            day = (t - lo) // DAY
            midnight = lo + (day + 1) * DAY
            stop = min(end, midnight)
            base = lo + day * DAY
            rows.append(PolarRow(int(day) + 1, (t - base) / DAY, (stop - base) / DAY, ev.event_type))
            t = stop
    rows.sort(key=lambda r: (r.day_index, r.start_fraction, r.end_fraction))
    return rows


def _minutes(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.4f}".rstrip("0")


def weekly_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iso_week", "event_count", "total_minutes"])
    for r in rows:
        w.writerow([r.iso_week, r.event_count, _minutes(r.total_minutes)])
    return buf.getvalue()


def polar_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["day_index", "start_fraction", "end_fraction", "event_type"])
    for r in rows:
        w.writerow([r.day_index, f"{r.start_fraction:.6f}", f"{r.end_fraction:.6f}", r.event_type])
    return buf.getvalue()
