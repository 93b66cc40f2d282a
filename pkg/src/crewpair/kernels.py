"""Kernel backend selection.

The compiled extension is used when importable; set ``CREWPAIR_BACKEND``
to ``python`` to force the pure-Python twin (``cython`` makes a missing
extension an import error).
"""

from __future__ import annotations

import os

from . import _pykernels

_requested = os.environ.get("CREWPAIR_BACKEND", "auto").lower()

if _requested == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _pykernels
        BACKEND = "python"

coverage_counts = _impl.coverage_counts
repair_cover = _impl.repair_cover
drop_redundant = _impl.drop_redundant
zero_deadhead_scan = _impl.zero_deadhead_scan
min_deadhead_fill = _impl.min_deadhead_fill
qi_fill = _impl.qi_fill
nearest_symdiff = _impl.nearest_symdiff
exact_cover = _impl.exact_cover

KERNEL_NAMES = ("coverage_counts", "repair_cover", "drop_redundant",
                "zero_deadhead_scan", "min_deadhead_fill", "qi_fill", "nearest_symdiff", "exact_cover")


def backend_module(name: str):
    """Return the kernel module for ``name`` ("python" or "cython")."""
    if name == "python":
        return _pykernels
    from . import _kernels  # type: ignore[attr-defined]
    return _kernels
