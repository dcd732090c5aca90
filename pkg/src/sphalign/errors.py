"""Exception types raised by the alignment and registration pipelines."""


class SphalignError(Exception):
    """Base class for all errors raised by this package."""


class EmptySetError(SphalignError):
    """An operation received an empty point set."""


class ZeroVectorError(SphalignError):
    """A vector with near-zero norm cannot be normalized."""


class NotUnitVectorError(SphalignError):
    """A vector expected to be unit length was not, beyond tolerance."""


class DegenerateMeanError(SphalignError):
    """The mean direction of a point set has near-zero resultant length.

    Raised when the resultant length falls below 1e-6, in which case no
    stable mean direction exists and pole alignment is undefined.
    """


class DegenerateConfigurationError(SphalignError):
    """A closed-form fit received a rank-deficient (collinear) configuration."""


class LengthMismatchError(SphalignError):
    """Two histograms that must share a bin count do not."""


class ShapeMismatchError(SphalignError):
    """Two point sets that must share a length do not."""


class PointAtCentroidError(SphalignError):
    """A point coincides with the cloud centroid and cannot be projected.

    Carries the offending indices in ``indices``.
    """

    def __init__(self, indices):
        self.indices = list(indices)
        super().__init__(
            f"{len(self.indices)} point(s) coincide with the centroid: "
            f"{self.indices[:10]}"
        )


class TooSparseError(SphalignError):
    """Normal estimation dropped more than half of the cloud."""


class EmptyResultError(SphalignError):
    """A thresholding step produced no points to align."""


class FormatError(SphalignError):
    """A file did not parse under its declared format."""
