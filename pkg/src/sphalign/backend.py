"""Kernel backend selection.

Histogram, correlation, and grid-search kernels exist twice: a compiled
numba version and a pure-numpy version with identical integer outputs.
``SPHALIGN_BACKEND`` picks one (``numba``, ``numpy``, or ``auto``); auto
prefers numba when it imports and falls back to numpy otherwise.
"""

import os

import numpy as np

from . import _kernels_numpy
from .errors import SphalignError

ENV_VAR = "SPHALIGN_BACKEND"

_impl = None
_name = None


def _load(name):
    if name == "numpy":
        return _kernels_numpy, "numpy"
    if name == "numba":
        from . import _kernels_numba
        return _kernels_numba, "numba"
    if name == "auto":
        try:
            from . import _kernels_numba
            return _kernels_numba, "numba"
        except ImportError:
            return _kernels_numpy, "numpy"
    raise SphalignError(
        f"unknown backend {name!r}; expected numba, numpy, or auto"
    )


def set_backend(name):
    """Force the kernel backend; returns the active backend name."""
    global _impl, _name
    _impl, _name = _load(name)
    return _name


def active_backend():
    """Name of the backend in use, resolving ``SPHALIGN_BACKEND`` on first call."""
    if _name is None:
        set_backend(os.environ.get(ENV_VAR, "auto").strip().lower() or "auto")
    return _name


def _points_f64(points):
    return np.ascontiguousarray(points, dtype=np.float64)


def hist2d_counts(points):
    active_backend()
    return _impl.hist2d_counts(_points_f64(points))


def axis_angle_counts(points, k):
    active_backend()
    return _impl.axis_angle_counts(_points_f64(points), int(k))


def correlate_circular(fixed, moving):
    active_backend()
    return _impl.correlate_circular(
        np.ascontiguousarray(fixed, dtype=np.int64),
        np.ascontiguousarray(moving, dtype=np.int64),
    )


def overlap_scores(source, template_mask, rot_mats):
    active_backend()
    return _impl.overlap_scores(
        _points_f64(source),
        np.ascontiguousarray(template_mask, dtype=np.uint8).ravel(),
        np.ascontiguousarray(rot_mats, dtype=np.float64),
    )


def warmup():
    """Run each kernel once on tiny inputs so JIT cost stays out of timings."""
    pts = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    hist2d_counts(pts)
    axis_angle_counts(pts, 1)
    correlate_circular(np.ones(4, dtype=np.int64), np.ones(4, dtype=np.int64))
    overlap_scores(pts, np.zeros(360 * 180, dtype=np.uint8), np.eye(3)[None])
    return active_backend()
