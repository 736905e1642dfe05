"""Kernel dispatch: compiled extension when importable, numpy fallback otherwise.

Set ``DEGENRELAX_PURE=1`` before import to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("DEGENRELAX_PURE", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

trapezoid = _impl.trapezoid
simpson = _impl.simpson
cumtrapz = _impl.cumtrapz
running_min = _impl.running_min
max_growth_ratio = _impl.max_growth_ratio
isolated_dips = _impl.isolated_dips
