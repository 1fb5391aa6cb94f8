"""Exception types shared across the package."""


class AcfocalError(Exception):
    """Base class for every error raised by this package."""


class DegenerateConfiguration(AcfocalError):
    """The correspondence pair leaves more than a 3-dimensional null space."""


class NoRealRoot(AcfocalError):
    """No positive real focal-length root survived the resultant solve."""


class ZeroPolynomial(AcfocalError):
    """All polynomial coefficients vanish; roots are undefined."""


class InterpolationIllConditioned(AcfocalError):
    """Determinant interpolation failed its residual check."""


class AllCheiralityFail(AcfocalError):
    """Every candidate pose places the points behind a camera."""


class DegenerateRay(AcfocalError):
    """Triangulation rays do not intersect in a unique finite point."""


class NormalEstimationFailed(AcfocalError):
    """Surface-normal recovery from the local affinity broke down."""


class EmptyPool(AcfocalError):
    """A selection routine was handed an empty candidate pool."""


class FieldOfViewExhausted(AcfocalError):
    """Rejection sampling could not place a point visible in both views."""


class PlaneThroughCenter(AcfocalError):
    """The scene plane contains a camera center; its homography degenerates."""


class InsufficientCorrespondences(AcfocalError):
    """Fewer than two affine correspondences were supplied."""


class NoSurvivingRoots(AcfocalError):
    """Every candidate across all samples was eliminated by the gates."""


class ParseError(AcfocalError):
    """A correspondence file line could not be parsed."""
