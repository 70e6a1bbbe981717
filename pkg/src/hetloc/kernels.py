"""Kernel dispatch: the compiled extension when it imports, else pure Python.

Set ``HETLOC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("HETLOC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

sync_product = _impl.sync_product
subset_construction = _impl.subset_construction
refine_partition = _impl.refine_partition
greedy_partition = _impl.greedy_partition

UNDEFINED = _pykernels.UNDEFINED
FOREIGN = _pykernels.FOREIGN

__all__ = [
    "BACKEND",
    "FOREIGN",
    "UNDEFINED",
    "greedy_partition",
    "refine_partition",
    "subset_construction",
    "sync_product",
]
