"""Select the compiled kernels when available, else the numpy fallback.

Set ``QTMSRADAR_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("QTMSRADAR_PURE", "") not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _ckernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = "compiled" if kernels.__name__.endswith("_ckernels") else "python"

__all__ = ["kernels", "BACKEND"]
