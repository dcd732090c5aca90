"""Correspondence-free alignment of spherical point patterns.

Estimates the rotation between two point sets on the unit sphere by
correlating histogram projections instead of matching individual points,
with adapters that lift 3D point clouds and equirectangular images onto
the sphere so the same machinery registers those too.
"""

from .align import (
    AlignmentResult,
    FrsOptions,
    SpmcOptions,
    frs_align,
    hybrid_align,
    spmc_align,
)
from .backend import active_backend, set_backend, warmup
from .errors import (
    DegenerateConfigurationError,
    DegenerateMeanError,
    EmptyResultError,
    EmptySetError,
    FormatError,
    LengthMismatchError,
    NotUnitVectorError,
    PointAtCentroidError,
    ShapeMismatchError,
    SphalignError,
    TooSparseError,
    ZeroVectorError,
)
from .hist import (
    BinaryHistogram2D,
    CorrelationResult,
    Histogram1D,
    build_axis_histograms,
    build_binary_histogram_2d,
    circular_cross_correlate,
    marginalize_azimuth,
)
from .pcr import PointCloud, RegistrationResult, case_embed, egi_embed, register
from .so3 import (
    axis_rotation,
    compose_zyx,
    geodesic_angle_deg,
    is_rotation,
    mean_direction,
    rotation_between_vectors,
    sample_rotations,
)
from .sphimage import estimate_rotation_images, rotate_image, sph_img_to_points
from .wahba import brute_force_search, overlap_score, solve_closed_form

__version__ = "0.1.0"

__all__ = [
    "AlignmentResult",
    "BinaryHistogram2D",
    "CorrelationResult",
    "DegenerateConfigurationError",
    "DegenerateMeanError",
    "EmptyResultError",
    "EmptySetError",
    "FormatError",
    "FrsOptions",
    "Histogram1D",
    "LengthMismatchError",
    "NotUnitVectorError",
    "PointAtCentroidError",
    "PointCloud",
    "RegistrationResult",
    "ShapeMismatchError",
    "SphalignError",
    "SpmcOptions",
    "TooSparseError",
    "ZeroVectorError",
    "active_backend",
    "axis_rotation",
    "brute_force_search",
    "build_axis_histograms",
    "build_binary_histogram_2d",
    "case_embed",
    "circular_cross_correlate",
    "compose_zyx",
    "egi_embed",
    "estimate_rotation_images",
    "frs_align",
    "geodesic_angle_deg",
    "hybrid_align",
    "is_rotation",
    "marginalize_azimuth",
    "mean_direction",
    "overlap_score",
    "register",
    "rotate_image",
    "rotation_between_vectors",
    "sample_rotations",
    "set_backend",
    "solve_closed_form",
    "sph_img_to_points",
    "spmc_align",
    "warmup",
    "__version__",
]
