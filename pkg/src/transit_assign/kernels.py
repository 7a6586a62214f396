"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
implementation is used.  Setting ``TRANSIT_ASSIGN_PURE=1`` forces the
fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("TRANSIT_ASSIGN_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

dijkstra = _impl.dijkstra
profile_scan = _impl.profile_scan


def backends() -> dict:
    """All importable backends by name, for benchmarks and equivalence tests."""
    found = {"python": _pykernels}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
