"""Kernel selection: compiled extension if available, pure Python otherwise.

Set RESOLVENT_LAB_PURE=1 to force the pure-Python path (used by the
benchmark and by tests that exercise the fallback).
"""

import os

if os.environ.get("RESOLVENT_LAB_PURE", "") not in ("", "0"):
    from . import _kernels_py as _impl

    COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        from . import _kernels_py as _impl

        COMPILED = False

factor = _impl.factor
solve = _impl.solve
