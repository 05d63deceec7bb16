"""Sweep-kernel backend selection.

The compiled extension is used when present; the pure-Python module is the
fallback and the semantic reference.  Set ATPGKIT_FORCE_PURE=1 to skip the
extension (used by the parity tests and the kernel benchmark).
"""

import os

from . import pure

if os.environ.get("ATPGKIT_FORCE_PURE"):
    _impl = pure
else:
    try:
        from . import _fastsim as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = pure

BACKEND = _impl.BACKEND_NAME
full_sweep = _impl.full_sweep

__all__ = ["BACKEND", "full_sweep", "pure"]
