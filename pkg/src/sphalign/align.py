"""Correspondence-free rotation estimation between two spherical patterns.

Three entry points:

- ``spmc_align``: closed-form two-stage estimate.  Both sets are rotated so
  their mean directions sit on the north pole, the azimuth marginals of the
  binarized 360x180 histograms are circularly correlated, and the rotations
  compose into the answer.  Fast but sensitive to mean-direction shifts
  from outliers.
- ``frs_align``: iterative refinement.  Per-axis direction-angle histograms
  of the moving set are correlated against the template's, the three
  recovered bin shifts become per-axis corrections, and the loop repeats
  until every shift hits the target (default 0).
- ``hybrid_align``: SPMC for initialization, FRS for refinement.

All results use one orientation convention: ``result.rotation @ source_i``
lands near the template pattern.  Callers wanting the opposite direction
take the transpose.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMeanError, EmptySetError
from .hist import (
    build_axis_histograms,
    build_binary_histogram_2d,
    circular_cross_correlate,
    marginalize_azimuth,
)
from .so3 import axis_rotation, check_unit, mean_direction, rotation_between_vectors
from .wahba import solve_closed_form

NORTH = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class SpmcOptions:
    binarize_threshold: int = 0
    normalize_to_positive_z: bool = False

    def __post_init__(self):
        if self.binarize_threshold < 0:
            raise ValueError("binarize_threshold must be >= 0")


@dataclass(frozen=True)
class FrsOptions:
    k: int = 1
    max_iterations: int = 50
    target_shift: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class AlignmentResult:
    """Outcome of one alignment.

    ``rotation`` maps source points onto the template pattern.
    ``iterations`` is 0 for SPMC and the number of refinement passes
    otherwise; ``shift_trace`` holds one (x, y, z) bin-shift triple per
    pass.  ``fallback`` marks a hybrid run that lost its SPMC stage to a
    degenerate mean and ran pure refinement instead.
    """

    rotation: np.ndarray
    method: str
    iterations: int
    peak_correlation: float
    shift_trace: list = field(default_factory=list)
    elapsed_seconds: float = 0.0
    fallback: bool = False

    def to_dict(self):
        return {
            "rotation": [float(v) for v in np.asarray(self.rotation).ravel()],
            "method": self.method,
            "iterations": int(self.iterations),
            "peak_correlation": float(self.peak_correlation),
            "shift_trace": [list(map(int, t)) for t in self.shift_trace],
            "elapsed_seconds": float(self.elapsed_seconds),
            "fallback": bool(self.fallback),
        }


def _validated(points, name):
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] == 0:
        raise EmptySetError(f"{name} must be a nonempty (N, 3) array")
    return check_unit(points, tol=1e-6, what=name)


def _fold_to_positive_z(points):
    flip = points[:, 2] < 0.0
    out = points.copy()
    out[flip] *= -1.0
    return out


def spmc_align(template, source, opts=None):
    """Two-stage closed-form alignment through the pole-aligned azimuth marginals."""
    opts = opts or SpmcOptions()
    template = _validated(template, "template")
    source = _validated(source, "source")
    t0 = time.perf_counter()

    r_a = rotation_between_vectors(NORTH, mean_direction(template)[0])
    r_b = rotation_between_vectors(NORTH, mean_direction(source)[0])
    template_np = template @ r_a.T
    source_np = source @ r_b.T
    if opts.normalize_to_positive_z:
        template_np = _fold_to_positive_z(template_np)
        source_np = _fold_to_positive_z(source_np)

    fixed = marginalize_azimuth(
        build_binary_histogram_2d(template_np, opts.binarize_threshold)
    )
    moving = marginalize_azimuth(
        build_binary_histogram_2d(source_np, opts.binarize_threshold)
    )
    corr = circular_cross_correlate(fixed, moving)

    # the pole-aligned source is the pole-aligned template advanced by the
    # recovered azimuth shift, so undo it before leaving the pole frame
    rotation = r_a.T @ axis_rotation("z", -float(corr.best_shift_bins)) @ r_b
    elapsed = time.perf_counter() - t0
    return AlignmentResult(
        rotation=rotation,
        method="spmc",
        iterations=0,
        peak_correlation=corr.best_score,
        shift_trace=[],
        elapsed_seconds=elapsed,
    )


def frs_align(template, source, opts=None):
    """Iterative alignment through per-axis direction-angle histograms."""
    opts = opts or FrsOptions()
    template = _validated(template, "template")
    source = _validated(source, "source")
    t0 = time.perf_counter()

    fixed = build_axis_histograms(template, opts.k)
    bin_deg = 1.0 / opts.k
    target = (opts.target_shift,) * 3

    cumulative = np.eye(3)
    moved = source
    trace = []
    peak = 0.0
    iterations = 0
    while iterations < opts.max_iterations:
        moving = build_axis_histograms(moved, opts.k)
        corr = [circular_cross_correlate(f, m) for f, m in zip(fixed, moving)]
        shifts = tuple(c.best_shift_bins for c in corr)
        peak = float(sum(c.best_score for c in corr))
        trace.append(shifts)
        iterations += 1
        if shifts == target:
            break
        step = (
            axis_rotation("z", -shifts[2] * bin_deg)
            @ axis_rotation("y", -shifts[1] * bin_deg)
            @ axis_rotation("x", -shifts[0] * bin_deg)
        )
        cumulative = step @ cumulative
        moved = source @ cumulative.T

    # the loop guarantees at least one pass, so `moved` is well defined
    rotation = solve_closed_form(source, moved)
    elapsed = time.perf_counter() - t0
    return AlignmentResult(
        rotation=rotation,
        method="frs",
        iterations=iterations,
        peak_correlation=peak,
        shift_trace=trace,
        elapsed_seconds=elapsed,
    )


def hybrid_align(template, source, spmc_opts=None, frs_opts=None):
    """SPMC initialization refined by FRS; falls back to pure FRS when the
    mean direction of either set is degenerate."""
    t0 = time.perf_counter()
    fallback = False
    try:
        first = spmc_align(template, source, spmc_opts)
        initial = first.rotation
    except DegenerateMeanError:
        fallback = True
        initial = np.eye(3)
    refined = frs_align(template, np.asarray(source) @ initial.T, frs_opts)
    rotation = refined.rotation @ initial
    elapsed = time.perf_counter() - t0
    return AlignmentResult(
        rotation=rotation,
        method="hybrid",
        iterations=refined.iterations,
        peak_correlation=refined.peak_correlation,
        shift_trace=refined.shift_trace,
        elapsed_seconds=elapsed,
        fallback=fallback,
    )
