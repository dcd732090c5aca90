"""Correspondence-based closed-form rotation fit and a grid-search oracle.

The closed-form solver serves as the final step of the iterative aligner
and as a test oracle; the exhaustive Euler-grid search provides an
algorithm-independent reference for correspondence-free alignment.
"""

import numpy as np

from . import backend
from .errors import DegenerateConfigurationError, ShapeMismatchError
from .hist import build_binary_histogram_2d


def solve_closed_form(source, target):
    """Least-squares rotation R with target ~= R @ source (index-aligned sets).

    SVD of the 3x3 cross-covariance with determinant correction, so the
    result is always a proper rotation even for noisy or reflective input.
    Raises DegenerateConfigurationError when the pairing is collinear and
    the rotation about that line is unidentifiable.
    """
    source = np.asarray(source, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if source.shape != target.shape or source.ndim != 2 or source.shape[1] != 3:
        raise ShapeMismatchError(
            f"need matching (N, 3) sets, got {source.shape} and {target.shape}"
        )
    if source.shape[0] < 2:
        raise DegenerateConfigurationError("need at least 2 pairs")
    h = source.T @ target
    u, sing, vt = np.linalg.svd(h)
    if sing[1] <= 1e-9 * max(sing[0], 1e-300):
        raise DegenerateConfigurationError(
            "pairing is collinear; rotation about the common line is free"
        )
    d = np.sign(np.linalg.det(vt.T @ u.T))
    return vt.T @ np.diag([1.0, 1.0, d]) @ u.T


def overlap_score(template, source, rotation=None, binarize_threshold=0):
    """Binary-histogram overlap of (rotated) source cells with template cells.

    Counts grid cells occupied by both sets after binarization at the given
    threshold; this is the objective the grid search maximizes.
    """
    template_hist = build_binary_histogram_2d(template, binarize_threshold)
    if rotation is not None:
        source = np.asarray(source, dtype=np.float64) @ np.asarray(rotation).T
    source_hist = build_binary_histogram_2d(source, binarize_threshold)
    return int(
        np.minimum(template_hist.bins, source_hist.bins).sum()
    )


def _euler_grid(step_deg):
    """ZYX Euler grid matrices in lexicographic (tz, ty, tx) order."""
    tz = np.arange(0.0, 360.0, step_deg)
    ty = np.arange(-90.0, 90.0 + 0.5 * step_deg, step_deg)
    tx = np.arange(0.0, 360.0, step_deg)
    gz, gy, gx = np.meshgrid(tz, ty, tx, indexing="ij")
    cz, sz = np.cos(np.radians(gz)).ravel(), np.sin(np.radians(gz)).ravel()
    cy, sy = np.cos(np.radians(gy)).ravel(), np.sin(np.radians(gy)).ravel()
    cx, sx = np.cos(np.radians(gx)).ravel(), np.sin(np.radians(gx)).ravel()
    mats = np.empty((cz.shape[0], 3, 3))
    mats[:, 0, 0] = cz * cy
    mats[:, 0, 1] = cz * sy * sx - sz * cx
    mats[:, 0, 2] = cz * sy * cx + sz * sx
    mats[:, 1, 0] = sz * cy
    mats[:, 1, 1] = sz * sy * sx + cz * cx
    mats[:, 1, 2] = sz * sy * cx - cz * sx
    mats[:, 2, 0] = -sy
    mats[:, 2, 1] = cy * sx
    mats[:, 2, 2] = cy * cx
    return mats


def brute_force_search(template, source, grid_step_deg):
    """Exhaustive Euler-grid alignment by binary-histogram overlap.

    Scores every grid rotation and returns (best_rotation, best_score);
    ties go to the lexicographically smallest (tz, ty, tx) triple.  Meant
    as a reference oracle for small sets, not a production path.
    """
    step = float(grid_step_deg)
    if not 1.0 <= step <= 30.0:
        raise ValueError("grid_step_deg must lie in [1, 30]")
    template_mask = build_binary_histogram_2d(template).bins.ravel()
    mats = _euler_grid(step)
    scores = backend.overlap_scores(
        np.asarray(source, dtype=np.float64), template_mask, mats
    )
    best = int(np.argmax(scores))
    return mats[best], int(scores[best])
