"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
bit-identical, just slower. Set SQLSCOUT_KERNELS=python to force the fallback
(useful for parity checks and debugging).
"""

from __future__ import annotations

import os

if os.environ.get("SQLSCOUT_KERNELS", "").lower() == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

mix_min = _impl.mix_min
levenshtein_u32 = _impl.levenshtein_u32
