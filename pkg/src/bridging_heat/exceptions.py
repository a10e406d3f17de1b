"""Exception and warning types shared by all modules."""


class BridgingHeatError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BridgingHeatError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CalibrationError(BridgingHeatError):
    """The rank-one coupling could not be fixed by the bridging conditions."""


class ConvergenceError(BridgingHeatError):
    """A quadrature or extrapolation failed its self-consistency check."""


class ContourError(BridgingHeatError):
    """An integrand was non-finite at a contour node."""


class ImaginaryResidueError(BridgingHeatError):
    """A real-valued kernel came back with a large imaginary part."""


class TruncationError(BridgingHeatError):
    """Data carries too much mass outside the computational window."""


class DegenerateFitError(BridgingHeatError, ValueError):
    """A regression problem has no unique solution."""


class ConfigError(BridgingHeatError, ValueError):
    """A run configuration is malformed."""


class AccuracyWarning(UserWarning):
    """Evaluation requested outside the validated accuracy envelope."""


class GridWarning(UserWarning):
    """The spatial grid is too coarse for the requested tolerance."""


class CriterionWarning(UserWarning):
    """An edge case of a criterion whose intent is ambiguous."""
