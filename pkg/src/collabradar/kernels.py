"""Backend selection for the hot kernels.

The compiled extension supplies the AUC kernels when it imports; set
``COLLABRADAR_PURE=1`` to force the numpy fallback.
"""

import os

from . import _fallback

if os.environ.get("COLLABRADAR_PURE", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "numpy"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "numpy"

# BLAS-backed einsum beats the scalar compiled loop for the row bilinear form
# (see benchmarks/bench_kernels.py), so it is used by both backends.
bilinear_rows = _fallback.bilinear_rows
grouped_auc = _impl.grouped_auc
bootstrap_auc = _impl.bootstrap_auc

__all__ = ["BACKEND", "bilinear_rows", "grouped_auc", "bootstrap_auc"]
