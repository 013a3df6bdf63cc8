"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy fallback.
Set ``QFFSAMPLE_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _fallback

if os.environ.get("QFFSAMPLE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _fallback

BACKEND = _impl.NAME
jacobi_eigh = _impl.jacobi_eigh
walk_apply = _impl.walk_apply
wctrl_apply = _impl.wctrl_apply
walk_horner = _impl.walk_horner
walk_powers = _impl.walk_powers

__all__ = ["BACKEND", "jacobi_eigh", "walk_apply", "wctrl_apply", "walk_horner", "walk_powers"]
