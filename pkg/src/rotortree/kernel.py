"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``ROTORTREE_PURE=1`` to force the fallback.
"""
import os

from . import _pykernel

RETURNED = _pykernel.RETURNED
ABSORBED = _pykernel.ABSORBED
NEED_EXPAND = _pykernel.NEED_EXPAND
BUDGET = _pykernel.BUDGET

_ckernel = None
if os.environ.get("ROTORTREE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernel
    except ImportError:
        _ckernel = None

if _ckernel is not None:
    advance = _ckernel.advance
    BACKEND = "cython"
else:
    advance = _pykernel.advance
    BACKEND = "python"

py_advance = _pykernel.advance
c_advance = _ckernel.advance if _ckernel is not None else None
