"""Kernel backend selection.

Set ``RYDSUB_NUMBA=0`` to force the pure-numpy kernels; numba is used
otherwise when it imports cleanly.
"""

import os

_FLAG = os.environ.get("RYDSUB_NUMBA", "1").strip().lower()

if _FLAG in ("0", "false", "no", "off"):
    from . import _kernels_np as kernels
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_nb as kernels
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba missing
        from . import _kernels_np as kernels
        BACKEND = "numpy"

__all__ = ["BACKEND", "kernels"]
