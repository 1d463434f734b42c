"""Hot per-face kernels with a numba path and a pure-numpy fallback.

Set ``INVFLOW_DISABLE_NUMBA=1`` (before import) to force the numpy path.
``BACKEND`` reports which implementation is active.
"""

import importlib
import os

from . import numpy_impl

_disabled = os.environ.get("INVFLOW_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

numba_impl = None
if not _disabled:
    try:
        numba_impl = importlib.import_module(".numba_impl", __name__)
    except ImportError:  # numba missing
        numba_impl = None

_impl = numba_impl if numba_impl is not None else numpy_impl
BACKEND = "numba" if numba_impl is not None else "numpy"

face_lengths = _impl.face_lengths
angles_from_lengths = _impl.angles_from_lengths
face_angles = _impl.face_angles
face_in_delta = _impl.face_in_delta
curvature = _impl.curvature
curvature_batch = _impl.curvature_batch
face_jacobians = _impl.face_jacobians

__all__ = [
    "BACKEND",
    "numpy_impl",
    "numba_impl",
    "face_lengths",
    "angles_from_lengths",
    "face_angles",
    "face_in_delta",
    "curvature",
    "curvature_batch",
    "face_jacobians",
]
