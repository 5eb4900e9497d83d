"""Kernel backend selection.

The compiled extension is used when it imported cleanly and the environment
variable TRKP_PURE is unset; otherwise the pure-Python twins serve. Both
implement identical semantics, so results are bit-identical either way.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
conv_slice = _kernels_py.conv_slice
dict_mul = _kernels_py.dict_mul

if not os.environ.get("TRKP_PURE"):
    try:
        from . import _kernels  # type: ignore[attr-defined]

        conv_slice = _kernels.conv_slice
        dict_mul = _kernels.dict_mul
        BACKEND = "compiled"
    except ImportError:
        pass
