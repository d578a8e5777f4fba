import contextlib
import os
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], print_blob=True
)
settings.load_profile("default")

from healthcep import IntervalSet, Store  # noqa: E402


def pair_lists(max_size=50, lo=0, hi=1000, max_len=60):
    """Lists of (start, end) pairs with start < end inside [lo, hi]."""

    @st.composite
    def one(draw):
        s = draw(st.integers(lo, hi - 1))
        e = draw(st.integers(s + 1, min(hi, s + max_len)))
        return (s, e)

    return st.lists(one(), max_size=max_size)


def interval_sets(**kw):
    return pair_lists(**kw).map(lambda ps: IntervalSet.from_pairs(ps))


@pytest.fixture
def mem_store():
    return Store(None)


# -- acceptance reporting ------------------------------------------------------

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Context manager recording the outcome of one acceptance check."""

    @contextlib.contextmanager
    def record(number, title):
        try:
            yield
        except BaseException:
            _CRITERIA[number] = ("FAIL", title)
            print(f"FAIL criterion {number}: {title}")
            raise
        if _CRITERIA.get(number, ("PASS",))[0] != "FAIL":
            _CRITERIA[number] = ("PASS", title)
        print(f"PASS criterion {number}: {title}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title = _CRITERIA[number]
        terminalreporter.write_line(f"{status} criterion {number}: {title}")
