"""Hot graph kernels, compiled when available.

The Cython build is picked at import time; set ``HARMONIC_LR_PURE_PYTHON=1``
to force the pure-Python versions. ``BACKEND`` names the active one.
"""
import os

from . import _pykernels

if os.environ.get("HARMONIC_LR_PURE_PYTHON") == "1":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

all_pairs_bfs = _impl.all_pairs_bfs
sphere_counts = _impl.sphere_counts

__all__ = ["BACKEND", "all_pairs_bfs", "sphere_counts"]
