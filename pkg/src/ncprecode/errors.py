"""Exception types shared across the library."""


class PrecodingError(Exception):
    """Base class for all library-specific errors."""


class NotPositiveDefinite(PrecodingError):
    """A 2x2 covariance that must be positive definite is not."""


class InfeasibleQ(PrecodingError):
    """Jammer covariance elements outside the PSD / unit-trace region."""


class InvalidConfidence(PrecodingError):
    """Confidence level outside the open interval (0, 1)."""


class DegenerateEllipse(PrecodingError):
    """Confidence ellipse with a negative principal variance."""


class Infeasible(PrecodingError):
    """The constraint set of a QP is empty."""


class ZeroRow(PrecodingError):
    """A constraint row that must be nonzero is numerically zero."""


class MaxIterations(PrecodingError):
    """Iterative solver exceeded its iteration cap."""


class ConfigError(PrecodingError):
    """Malformed run configuration."""
