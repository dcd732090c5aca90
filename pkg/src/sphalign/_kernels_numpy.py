"""Pure-numpy histogram, correlation, and grid-search kernels.

Reference implementations for the optional compiled backend in
``_kernels_numba``.  Both backends floor angles into integer bins and do all
accumulation in int64, so their outputs agree exactly.
"""

import numpy as np

AZIMUTH_BINS = 360
POLAR_BINS = 180
CELLS = AZIMUTH_BINS * POLAR_BINS


def _cell_indices(x, y, z):
    """Flat azimuth-major cell index (azimuth*180 + polar) per point."""
    alpha = np.mod(np.degrees(np.arctan2(y, x)), 360.0)
    beta = np.degrees(np.arccos(np.clip(z, -1.0, 1.0)))
    # alpha can land on exactly 360.0 after the mod when the raw angle is a
    # tiny negative; beta hits 180.0 exactly at the south pole.
    a = np.floor(alpha).astype(np.int64) % AZIMUTH_BINS
    b = np.minimum(np.floor(beta).astype(np.int64), POLAR_BINS - 1)
    return a * POLAR_BINS + b


def hist2d_counts(points):
    """Occupancy counts over the 360x180 spherical grid, azimuth-major."""
    cells = _cell_indices(points[:, 0], points[:, 1], points[:, 2])
    counts = np.bincount(cells, minlength=CELLS)
    return counts.reshape(AZIMUTH_BINS, POLAR_BINS).astype(np.int64)


def axis_angle_counts(points, k):
    """Counts over the three axis direction angles at k bins per degree.

    Row order is (theta_x, theta_y, theta_z); each row has k*360 bins.
    """
    x, y, z = points[:, 0], points[:, 1], points[:, 2]
    length = AZIMUTH_BINS * k
    kf = float(k)
    out = np.empty((3, length), dtype=np.int64)
    for row, (num, den) in enumerate(((z, y), (x, z), (y, x))):
        ang = np.mod(np.degrees(np.arctan2(num, den)), 360.0)
        idx = np.floor(ang * kf).astype(np.int64) % length
        out[row] = np.bincount(idx, minlength=length)
    return out


def correlate_circular(fixed, moving):
    """scores[s] = sum over lam of fixed[lam] * moving[(lam + s) % L]."""
    length = fixed.shape[0]
    lam = np.arange(length, dtype=np.int64)
    idx = (lam[None, :] + lam[:, None]) % length  # [s, lam]
    return (moving[idx] * fixed[None, :]).sum(axis=1)


def overlap_scores(source, template_mask, rot_mats):
    """Binary-overlap score of the rotated source against a template mask.

    For each rotation, counts the distinct occupied cells of the rotated
    source that are set in ``template_mask`` (flat, length 64800).
    """
    n_grid = rot_mats.shape[0]
    n_pts = source.shape[0]
    scores = np.empty(n_grid, dtype=np.int64)
    # chunk so the (chunk, n_pts) intermediates stay around 32 MB
    chunk = max(1, int(4_000_000 // max(n_pts, 1)))
    mask = template_mask.astype(bool)
    for g0 in range(0, n_grid, chunk):
        rots = rot_mats[g0:g0 + chunk]
        rotated = np.einsum("gij,nj->gni", rots, source)
        cells = _cell_indices(rotated[..., 0], rotated[..., 1], rotated[..., 2])
        cells.sort(axis=1)
        fresh = np.ones(cells.shape, dtype=bool)
        fresh[:, 1:] = cells[:, 1:] != cells[:, :-1]
        scores[g0:g0 + rots.shape[0]] = (mask[cells] & fresh).sum(axis=1)
    return scores
