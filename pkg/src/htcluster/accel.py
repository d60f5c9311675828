"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the pure
Python implementations are used. Set ``HTC_FORCE_PYTHON_KERNELS=1`` to skip
the compiled backend (mainly for tests and benchmarks).
"""
from __future__ import annotations

import os

from . import _accel_py

if os.environ.get("HTC_FORCE_PYTHON_KERNELS"):
    _impl = _accel_py
    COMPILED = False
else:
    try:
        from . import _accel as _impl  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        _impl = _accel_py
        COMPILED = False

threshold_sweep = _impl.threshold_sweep
dijkstra_all_sources = _impl.dijkstra_all_sources


def backends():
    """Return the available kernel backends as ``{name: module}``."""
    found = {"python": _accel_py}
    try:
        from . import _accel

        found["compiled"] = _accel
    except ImportError:
        pass
    return found
