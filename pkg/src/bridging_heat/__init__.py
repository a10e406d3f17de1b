"""Bridging heat flow across an inverse-square singularity on the line.

The operator ``-d^2/dx^2 + C_alpha / x^2`` with ``C_alpha = alpha (alpha + 2) / 4``
is realised with the bridging matching conditions at ``x = 0``; the package
builds its resolvent, the heat kernel by contour integration, the evolution
of initial data, and the scattering coefficients of the related protocols.
"""

__version__ = "0.1.0"

from .dispersive import DecayFit, decay_rate_fit, gradient_norm
from .estimators import BridgingHeatFlow, ClassicalHeatFlow, PowerLawDecay
from .evolve import BoundaryTraces, InitialDatum, Propagator, boundary_traces, evolve
from .exceptions import (
    AccuracyWarning,
    BridgingHeatError,
    CalibrationError,
    ConfigError,
    ContourError,
    ConvergenceError,
    CriterionWarning,
    DegenerateFitError,
    DomainError,
    GridWarning,
    ImaginaryResidueError,
    TruncationError,
)
from .extensions import ExtensionSpec, bc_residual, bridging_spec, is_nonnegative
from .grid import SampledFunction, SpatialGrid, integral, lp_norm, weighted_mass
from .heat_kernel import Contour, heat_kernel
from .resolvent import Alpha, SpectralPoint, resolvent_kernel, verify_resolvent_identity
from .scattering import (
    ExtensionParamsIIa,
    bridging_coefficients,
    reflection,
    reflectionless_energy,
    transmission,
)

__all__ = [
    "__version__",
    "Alpha",
    "SpectralPoint",
    "resolvent_kernel",
    "verify_resolvent_identity",
    "Contour",
    "heat_kernel",
    "SpatialGrid",
    "SampledFunction",
    "lp_norm",
    "integral",
    "weighted_mass",
    "InitialDatum",
    "Propagator",
    "BoundaryTraces",
    "evolve",
    "boundary_traces",
    "ExtensionParamsIIa",
    "transmission",
    "reflection",
    "reflectionless_energy",
    "bridging_coefficients",
    "ExtensionSpec",
    "bc_residual",
    "is_nonnegative",
    "bridging_spec",
    "DecayFit",
    "decay_rate_fit",
    "gradient_norm",
    "BridgingHeatFlow",
    "ClassicalHeatFlow",
    "PowerLawDecay",
    "BridgingHeatError",
    "DomainError",
    "CalibrationError",
    "ConvergenceError",
    "ContourError",
    "ImaginaryResidueError",
    "TruncationError",
    "DegenerateFitError",
    "ConfigError",
    "AccuracyWarning",
    "GridWarning",
    "CriterionWarning",
]
