"""Hot loops with a compiled implementation and a numpy fallback.

The compiled extension is used when it was built at install time; setting
the environment variable ``KILLING_TRANSPORT_PURE=1`` forces the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

if _ckernels is not None and not os.environ.get("KILLING_TRANSPORT_PURE"):
    rk4_linear = _ckernels.rk4_linear
    BACKEND = "cython"
else:
    rk4_linear = _pykernels.rk4_linear
    BACKEND = "python"


def backends() -> dict:
    """All available implementations of ``rk4_linear`` keyed by name."""
    out = {"python": _pykernels.rk4_linear}
    if _ckernels is not None:
        out["cython"] = _ckernels.rk4_linear
    return out


__all__ = ["BACKEND", "backends", "rk4_linear"]
