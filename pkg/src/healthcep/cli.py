"""``healthcep`` command line.

Exit status: 0 on success, 1 on usage errors, 2 on data errors (bad input
files, unit mismatches, pattern errors).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path

from . import dsl, plan, reports
from .algebra import Window
from .config import Config
from .errors import DataError, IngestError, PatternError
from .ingest import ADAPTERS, ingest_stations, run_adapter
from .model import EventRecord, Interval, LocationSample, Sample, to_timestamp
from .store import Store

log = logging.getLogger("healthcep")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@contextlib.contextmanager
def _output(target):
    if target in (None, "-"):
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(target, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _store(args) -> Store:
    return Store(args.store, Config.load(args.config))


def cmd_ingest(args):
    with _store(args) as store:
        counts = run_adapter(args.adapter, args.input, store, args.source)
    samples = ", ".join(f"{k}={v}" for k, v in sorted(counts["samples"].items())) or "none"
    print(f"events={counts['events']} samples: {samples}")


def cmd_stations(args):
    with _store(args) as store:
        table = ingest_stations(args.stations, args.readings, store)
    print(f"stations={len(table)} readings={table.reading_count}")


def cmd_define(args):
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(str(exc)) from None
    definitions = dsl.parse(text)
    with _store(args) as store:
        for d in definitions:
            p = store.register_definition(d)
            print(f"{d.name}: lookback={p.lookback}s inputs={','.join(sorted(p.inputs))}")


def cmd_eval(args):
    with _store(args) as store:
        p = store.definition_plan(args.name)
        if p is None:
            raise DataError(f"no definition named {args.name!r}; register it with 'define'")
        window = Window.of(args.start, args.end)
        records = plan.evaluate(p, window, store)
    with _output(args.output) as out:
        for rec in records:
            out.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


def parse_watch_line(line: str):
    """One watch-mode record.

    ``timestamp,stream,value,unit`` is a sample, ``timestamp,Location,lat,lon``
    a location fix, ``#activity,type,name,start,end`` an event.  Returns
    ``(stream_id, sample)`` or ``(None, EventRecord)``; None for blank lines
    and the optional header.
    """
    line = line.strip()
    if not line or line == "timestamp,stream,value,unit":
        return None
    fields = [f.strip() for f in line.split(",")]
    if fields[0] == "#activity":
        if len(fields) != 5:
            raise DataError("activity record needs #activity,type,name,start,end")
        iv = Interval(to_timestamp(fields[3]), to_timestamp(fields[4]))
        return None, EventRecord(fields[1], fields[2] or fields[1], iv, {"source": "watch"})
    if len(fields) != 4:
        raise DataError(f"expected 4 fields, got {len(fields)}")
    t = to_timestamp(fields[0])
    if fields[1] == plan.LOCATION:
        return fields[1], LocationSample(t, float(fields[2]), float(fields[3]), "watch")
    return fields[1], Sample(t, float(fields[2]), fields[3], "watch")


def _flush(store, samples, events, out):
    by_stream = {}
    for sid, s in samples:
        sid = store.resolve(sid)
        if store.kind(sid) is None:
            store.register_stream(sid, "location" if isinstance(s, LocationSample) else "real", getattr(s, "unit", None))
        by_stream.setdefault(sid, []).append(s)
    for rec in store.advance(by_stream, events):
        out.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
    out.flush()


def cmd_watch(args):
    source = sys.stdin if args.input == "-" else open(args.input, encoding="utf-8")
    with _store(args) as store, source:
        if not store.definitions:
            log.warning("no definitions registered; watch will only ingest")
        samples, events = [], []
        for lineno, line in enumerate(source, 1):
            try:
                rec = parse_watch_line(line)
            except (ValueError, DataError) as exc:
                raise IngestError(str(exc), args.input, lineno) from None
            if rec is None:
                continue
            if rec[0] is None:
                events.append(rec[1])
            else:
                samples.append(rec)
            if len(samples) + len(events) >= args.batch:
                _flush(store, samples, events, sys.stdout)
                samples, events = [], []
        if samples or events:
            _flush(store, samples, events, sys.stdout)


def cmd_report(args):
    with _store(args) as store:
        rows = reports.report_weekly(args.event_type, args.year, store)
    with _output(args.output) as out:
        out.write(reports.weekly_csv(rows))


def cmd_export(args):
    with _store(args) as store:
        rows = reports.export_polar(args.event_type, args.year, store)
    with _output(args.output) as out:
        out.write(reports.polar_csv(rows))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI configuration file")
    common.add_argument("--store", required=True, help="store directory")

    p = _Parser(prog="healthcep", description="Interface-event processing over personal health data.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("ingest", parents=[common], help="load a vendor export")
    s.add_argument("--adapter", required=True, choices=ADAPTERS)
    s.add_argument("--input", required=True)
    s.add_argument("--source", help="source name recorded with each sample")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("stations", parents=[common], help="load air-quality stations")
    s.add_argument("--stations", required=True)
    s.add_argument("--readings", required=True)
    s.set_defaults(func=cmd_stations)

    s = sub.add_parser("define", parents=[common], help="register pattern definitions")
    s.add_argument("--file", required=True)
    s.set_defaults(func=cmd_define)

    s = sub.add_parser("eval", parents=[common], help="evaluate a definition over a window")
    s.add_argument("--name", required=True)
    s.add_argument("--from", dest="start", required=True)
    s.add_argument("--to", dest="end", required=True)
    s.add_argument("--output", default="-")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("watch", parents=[common], help="continuous evaluation over streamed records")
    s.add_argument("--input", default="-")
    s.add_argument("--batch", type=int, default=1, help="records per advance (default 1)")
    s.set_defaults(func=cmd_watch)

    s = sub.add_parser("report", help="summary reports")
    rsub = s.add_subparsers(dest="report", parser_class=_Parser, required=True)
    r = rsub.add_parser("weekly", parents=[common])
    r.add_argument("--event-type", required=True)
    r.add_argument("--year", type=int, required=True)
    r.add_argument("--output", default="-")
    r.set_defaults(func=cmd_report)

    s = sub.add_parser("export", help="plot-ready exports")
    esub = s.add_subparsers(dest="export", parser_class=_Parser, required=True)
    e = esub.add_parser("polar", parents=[common])
    e.add_argument("--event-type", required=True)
    e.add_argument("--year", type=int, required=True)
    e.add_argument("--output", default="-")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "batch", 1) < 1:
        parser.error("--batch must be at least 1")
    try:
        args.func(args)
    except (DataError, PatternError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
