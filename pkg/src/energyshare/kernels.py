"""Kernel selection: the compiled extension when built, else pure Python.

Set ``ENERGYSHARE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("ENERGYSHARE_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

maxplus = _impl.maxplus
window_max = _impl.window_max
BACKEND = "compiled" if _impl is not _kernels_py else "python"
