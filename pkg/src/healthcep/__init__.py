"""Interval-based complex event processing over personal health streams."""

from .algebra import Window, and_, clip, delay, not_, or_
from .config import Config
from .dsl import Definition, format, parse
from .errors import DataError, PatternError, PatternSyntaxError
from .kernels import BACKEND_NAME
from .model import EventRecord, Interval, IntervalSet, LocationSample, Sample, Series
from .plan import EvaluationPlan, compile, evaluate, evaluate_set
from .store import Store

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "Config",
    "DataError",
    "Definition",
    "EvaluationPlan",
    "EventRecord",
    "Interval",
    "IntervalSet",
    "LocationSample",
    "PatternError",
    "PatternSyntaxError",
    "Sample",
    "Series",
    "Store",
    "Window",
    "and_",
    "clip",
    "compile",
    "delay",
    "evaluate",
    "evaluate_set",
    "format",
    "not_",
    "or_",
    "parse",
]
