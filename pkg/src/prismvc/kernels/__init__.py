"""Kernel backend selection.

The compiled Cython backend is used when the extension built; otherwise the
pure numpy backend. PRISMVC_KERNELS=pure|compiled forces the choice (asking
for the compiled backend when it is missing is an error rather than a silent
downgrade).
"""
from __future__ import annotations

import os

from . import _pure

_AVAILABLE = {"pure": _pure}
try:
    from . import _core  # type: ignore[attr-defined]

    _AVAILABLE["compiled"] = _core
except ImportError:
    _core = None

_forced = os.environ.get("PRISMVC_KERNELS", "").strip().lower()
if _forced:
    if _forced not in ("pure", "compiled"):
        raise ImportError(f"PRISMVC_KERNELS must be 'pure' or 'compiled', got {_forced!r}")
    if _forced not in _AVAILABLE:
        raise ImportError("PRISMVC_KERNELS=compiled but the extension is not built")
    _impl = _AVAILABLE[_forced]
else:
    _impl = _AVAILABLE.get("compiled", _pure)

BACKEND: str = _impl.BACKEND_NAME

norm_table = _impl.norm_table
pair_rows = _impl.pair_rows
distance_rows = _impl.distance_rows
common_neighbor_counts = _impl.common_neighbor_counts
mask_tally = _impl.mask_tally
shatter_flags = _impl.shatter_flags

# coords_table and popcount are plain numpy helpers, not worth compiling
coords_table = _pure.coords_table
popcount = _pure.popcount


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_AVAILABLE))


def get_backend(name: str):
    """Module object for an explicitly named backend (used by the benchmark)."""
    if name not in _AVAILABLE:
        raise KeyError(f"backend {name!r} not available (have {available_backends()})")
    return _AVAILABLE[name]
