"""Kernel backend selection.

The hot loops (compensated entropy sums, grouped key reduction, sparse
product-accumulate convolution) exist twice: a Cython extension built at
install time and a pure numpy fallback with identical signatures.  The
extension is preferred when importable; setting ``ENTROPYLAB_BACKEND`` to
``python`` or ``cython`` forces one side (the latter raises if the
extension is missing).
"""

from __future__ import annotations

import os

_requested = os.environ.get("ENTROPYLAB_BACKEND", "").strip().lower()
if _requested not in ("", "cython", "python"):
    raise RuntimeError(
        f"ENTROPYLAB_BACKEND must be 'cython' or 'python', got {_requested!r}"
    )

if _requested == "python":
    from entropylab import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from entropylab import _kernels_cy as kernels  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from entropylab import _kernels_py as kernels  # type: ignore[no-redef]

        BACKEND = "python"


def get_backend() -> str:
    """Name of the kernel backend in use: 'cython' or 'python'."""
    return BACKEND
