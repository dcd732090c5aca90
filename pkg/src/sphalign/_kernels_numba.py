"""Numba-compiled twins of the kernels in ``_kernels_numpy``.

Same float operations per point, same int64 accumulation, so results are
bit-identical to the numpy backend.  fastmath stays off for that reason.
"""

import numpy as np
from numba import njit

AZIMUTH_BINS = 360
POLAR_BINS = 180
CELLS = AZIMUTH_BINS * POLAR_BINS
_RAD2DEG = 180.0 / np.pi


@njit(cache=True)
def _cell_index(x, y, z):
    alpha = np.arctan2(y, x) * _RAD2DEG
    if alpha < 0.0:
        alpha += 360.0
    if z > 1.0:
        z = 1.0
    elif z < -1.0:
        z = -1.0
    beta = np.arccos(z) * _RAD2DEG
    a = int(np.floor(alpha))
    if a >= AZIMUTH_BINS:  # alpha rounded up to exactly 360.0
        a -= AZIMUTH_BINS
    b = int(np.floor(beta))
    if b >= POLAR_BINS:  # south pole lands on 180.0 exactly
        b = POLAR_BINS - 1
    return a * POLAR_BINS + b


@njit(cache=True)
def hist2d_counts(points):
    counts = np.zeros(CELLS, dtype=np.int64)
    for i in range(points.shape[0]):
        counts[_cell_index(points[i, 0], points[i, 1], points[i, 2])] += 1
    return counts.reshape(AZIMUTH_BINS, POLAR_BINS)


@njit(cache=True)
def axis_angle_counts(points, k):
    length = AZIMUTH_BINS * k
    out = np.zeros((3, length), dtype=np.int64)
    kf = float(k)
    for i in range(points.shape[0]):
        x = points[i, 0]
        y = points[i, 1]
        z = points[i, 2]
        tx = np.arctan2(z, y) * _RAD2DEG
        if tx < 0.0:
            tx += 360.0
        ty = np.arctan2(x, z) * _RAD2DEG
        if ty < 0.0:
            ty += 360.0
        tz = np.arctan2(y, x) * _RAD2DEG
        if tz < 0.0:
            tz += 360.0
        ix = int(tx * kf)
        if ix >= length:
            ix -= length
        iy = int(ty * kf)
        if iy >= length:
            iy -= length
        iz = int(tz * kf)
        if iz >= length:
            iz -= length
        out[0, ix] += 1
        out[1, iy] += 1
        out[2, iz] += 1
    return out


@njit(cache=True)
def correlate_circular(fixed, moving):
    length = fixed.shape[0]
    scores = np.empty(length, dtype=np.int64)
    for s in range(length):
        acc = np.int64(0)
        for lam in range(length):
            j = lam + s
            if j >= length:
                j -= length
            acc += fixed[lam] * moving[j]
        scores[s] = acc
    return scores


@njit(cache=True)
def overlap_scores(source, template_mask, rot_mats):
    n_grid = rot_mats.shape[0]
    n_pts = source.shape[0]
    scores = np.zeros(n_grid, dtype=np.int64)
    # stamp buffer marks cells already counted for the current rotation,
    # avoiding a full clear of all 64800 cells per rotation
    stamp = np.full(CELLS, -1, dtype=np.int64)
    for g in range(n_grid):
        r00 = rot_mats[g, 0, 0]
        r01 = rot_mats[g, 0, 1]
        r02 = rot_mats[g, 0, 2]
        r10 = rot_mats[g, 1, 0]
        r11 = rot_mats[g, 1, 1]
        r12 = rot_mats[g, 1, 2]
        r20 = rot_mats[g, 2, 0]
        r21 = rot_mats[g, 2, 1]
        r22 = rot_mats[g, 2, 2]
        acc = np.int64(0)
        for i in range(n_pts):
            x = source[i, 0]
            y = source[i, 1]
            z = source[i, 2]
            rx = r00 * x + r01 * y + r02 * z
            ry = r10 * x + r11 * y + r12 * z
            rz = r20 * x + r21 * y + r22 * z
            cell = _cell_index(rx, ry, rz)
            if stamp[cell] != g:
                stamp[cell] = g
                if template_mask[cell] != 0:
                    acc += 1
        scores[g] = acc
    return scores
