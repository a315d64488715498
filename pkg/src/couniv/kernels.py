"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``COUNIV_PURE=1`` to force the fallback (used by the benchmark and by the
test-suite parity checks).
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("COUNIV_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels
    else:
        BACKEND = "cython"
else:
    _impl = _pykernels

reduce_codes = _impl.reduce_codes
mul_codes = _impl.mul_codes
index_sum_codes = _impl.index_sum_codes
phi_recursive = _impl.phi_recursive
set_product = _impl.set_product

__all__ = [
    "BACKEND",
    "reduce_codes",
    "mul_codes",
    "index_sum_codes",
    "phi_recursive",
    "set_product",
]
