"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module is used.  Setting ``HEALTHCEP_PURE=1`` in the
environment forces the fallback.
"""

import os

from . import _pykernels as python_backend

try:
    if os.environ.get("HEALTHCEP_PURE", "") not in ("", "0"):
        raise ImportError("pure backend requested")
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend
BACKEND_NAME = "cython" if compiled_backend is not None else "python"

normalize = backend.normalize
intersect = backend.intersect
union = backend.union
complement = backend.complement
hold_runs = backend.hold_runs
trailing_median = backend.trailing_median

__all__ = [
    "BACKEND_NAME",
    "backend",
    "compiled_backend",
    "python_backend",
    "normalize",
    "intersect",
    "union",
    "complement",
    "hold_runs",
    "trailing_median",
]
