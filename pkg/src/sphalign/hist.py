"""Spherical histograms and circular cross-correlation.

The shared kernel of both aligners: a binarized 360x180 azimuth/polar
histogram whose azimuth marginal drives the pole-aligned correlation, and
per-axis direction-angle histograms driving the iterative refinement.
"""

from dataclasses import dataclass, field

import numpy as np

from . import backend
from .errors import LengthMismatchError

AZIMUTH_BINS = 360
POLAR_BINS = 180


@dataclass(frozen=True)
class BinaryHistogram2D:
    """360x180 azimuth-major grid of {0,1} cells."""

    bins: np.ndarray
    binarize_threshold: int = 0

    def __post_init__(self):
        if self.bins.shape != (AZIMUTH_BINS, POLAR_BINS):
            raise ValueError(
                f"expected ({AZIMUTH_BINS}, {POLAR_BINS}) grid, got {self.bins.shape}"
            )

    @property
    def set_cells(self):
        return int(self.bins.sum())


@dataclass(frozen=True)
class Histogram1D:
    """Circular histogram with k*360 bins of nonnegative integer counts."""

    counts: np.ndarray
    k: int = 1

    def __post_init__(self):
        if self.counts.shape != (self.k * AZIMUTH_BINS,):
            raise ValueError(
                f"expected length {self.k * AZIMUTH_BINS}, got {self.counts.shape}"
            )

    @property
    def length(self):
        return self.counts.shape[0]


@dataclass(frozen=True)
class CorrelationResult:
    best_shift_bins: int
    best_score: float
    scores: np.ndarray = field(repr=False)


def build_binary_histogram_2d(points, binarize_threshold=0):
    """Binarized occupancy histogram: cell = 1 iff raw count > threshold.

    Points map to cell (floor(alpha_deg), floor(beta_deg)); the south pole
    (beta = 180) clamps into polar bin 179.
    """
    counts = backend.hist2d_counts(np.asarray(points, dtype=np.float64))
    thr = int(binarize_threshold)
    if thr < 0:
        raise ValueError("binarize_threshold must be nonnegative")
    return BinaryHistogram2D(
        bins=(counts > thr).astype(np.uint8), binarize_threshold=thr
    )


def marginalize_azimuth(hist2d):
    """Sum the binarized grid over polar bins: counts[a] = set cells in column a."""
    counts = hist2d.bins.astype(np.int64).sum(axis=1)
    return Histogram1D(counts=counts, k=1)


def build_axis_histograms(points, k=1):
    """Raw-count circular histograms over the three axis direction angles.

    Returns (h_theta_x, h_theta_y, h_theta_z), each with k*360 bins of
    width 1/k degree.
    """
    k = int(k)
    if k < 1:
        raise ValueError("k must be >= 1")
    rows = backend.axis_angle_counts(np.asarray(points, dtype=np.float64), k)
    return tuple(Histogram1D(counts=rows[i].copy(), k=k) for i in range(3))


def circular_cross_correlate(fixed, moving):
    """All-shifts circular correlation of two equal-length histograms.

    scores[s] = sum over lam of fixed[lam] * moving[(lam + s) mod L].
    The best shift is the argmax; ties break to the smallest shift index.
    """
    if fixed.length != moving.length:
        raise LengthMismatchError(
            f"histogram lengths differ: {fixed.length} vs {moving.length}"
        )
    scores = backend.correlate_circular(fixed.counts, moving.counts)
    best = int(np.argmax(scores))  # argmax returns the first (smallest) maximum
    return CorrelationResult(
        best_shift_bins=best, best_score=float(scores[best]), scores=scores
    )
