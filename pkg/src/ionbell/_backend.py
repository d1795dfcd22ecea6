"""Kernel backend selection.

The compiled extension is preferred; the NumPy fallback is used when the
extension is unavailable or when ``IONBELL_PURE_PYTHON`` is set in the
environment.  ``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import os

if os.environ.get("IONBELL_PURE_PYTHON"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
