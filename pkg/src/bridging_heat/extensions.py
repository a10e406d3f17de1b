"""Self-adjoint extension families at the level of one transversal mode.

Boundary conditions are stated on the four traces ``(g0-, g0+, g1-, g1+)``
produced by :func:`bridging_heat.evolve.boundary_traces`.  The cylinder
traces ``f0, f1`` of a mode-zero function ``f = |x|^(alpha/2) u`` are
``f0 = g0`` and, because the side sign in the definition of ``f1`` cancels
the sign of ``d|x|/dx``, also ``f1 = g1`` on both sides.  The bridging
conditions then read ``g0- = g0+`` and ``g1- + g1+ = 0``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .evolve import BoundaryTraces
from .exceptions import CriterionWarning, DomainError

__all__ = [
    "VARIANTS",
    "ExtensionSpec",
    "GammaMatrix",
    "bc_residual",
    "is_nonnegative",
    "bridging_spec",
]

VARIANTS = ("Friedrichs", "IR", "IL", "IIa", "III")


@dataclass(frozen=True)
class GammaMatrix:
    """Hermitian matrix ``[[g1, g2 + i g3], [g2 - i g3, g4]]``."""

    g1: float
    g2: float
    g3: float
    g4: float

    @property
    def matrix(self) -> np.ndarray:
        off = complex(self.g2, self.g3)
        return np.array([[self.g1, off], [off.conjugate(), self.g4]], dtype=complex)

    def eigenvalues(self) -> tuple[float, float]:
        mean = 0.5 * (self.g1 + self.g4)
        rad = 0.5 * math.sqrt((self.g1 - self.g4) ** 2 + 4.0 * (self.g2**2 + self.g3**2))
        return mean - rad, mean + rad

    def is_zero(self) -> bool:
        return self.g1 == self.g2 == self.g3 == self.g4 == 0.0


@dataclass(frozen=True)
class ExtensionSpec:
    """One member of an extension family.

    Build with :meth:`friedrichs`, :meth:`right`, :meth:`left`, :meth:`iia`
    or :meth:`iii`.

    Attributes
    ----------
    variant : {"Friedrichs", "IR", "IL", "IIa", "III"}
    a : complex
        Used by II_a only.
    gamma : float
        Used by I_R, I_L and II_a.
    matrix : GammaMatrix or None
        Used by III only.
    """

    variant: str
    a: complex = 0.0
    gamma: float = 0.0
    matrix: GammaMatrix | None = None

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown extension variant {self.variant!r}")
        a, g = complex(self.a), float(self.gamma)
        if not (cmath.isfinite(a) and math.isfinite(g)):
            raise DomainError("extension parameters must be finite")
        if self.variant == "III":
            if self.matrix is None:
                raise DomainError("family III needs its Gamma matrix")
            vals = (self.matrix.g1, self.matrix.g2, self.matrix.g3, self.matrix.g4)
            if not all(math.isfinite(v) for v in vals):
                raise DomainError("extension parameters must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "gamma", g)

    @classmethod
    def friedrichs(cls) -> "ExtensionSpec":
        return cls("Friedrichs")

    @classmethod
    def right(cls, gamma: float) -> "ExtensionSpec":
        return cls("IR", gamma=gamma)

    @classmethod
    def left(cls, gamma: float) -> "ExtensionSpec":
        return cls("IL", gamma=gamma)

    @classmethod
    def iia(cls, a: complex, gamma: float) -> "ExtensionSpec":
        return cls("IIa", a=a, gamma=gamma)

    @classmethod
    def iii(cls, g1: float, g2: float, g3: float, g4: float) -> "ExtensionSpec":
        return cls("III", matrix=GammaMatrix(float(g1), float(g2), float(g3), float(g4)))

    def describe(self) -> dict:
        out = {"variant": self.variant}
        if self.variant in ("IR", "IL", "IIa"):
            out["gamma"] = self.gamma
        if self.variant == "IIa":
            out["a"] = [self.a.real, self.a.imag]
        if self.variant == "III":
            m = self.matrix
            out["gamma_matrix"] = [m.g1, m.g2, m.g3, m.g4]
        return out


def _traces(traces) -> tuple[complex, complex, complex, complex]:
    if isinstance(traces, BoundaryTraces):
        vals = traces.as_tuple()
    else:
        vals = tuple(traces)
        if len(vals) != 4:
            raise DomainError("expected traces (g0-, g0+, g1-, g1+)")
    vals = tuple(complex(v) for v in vals)
    if not all(cmath.isfinite(v) for v in vals):
        raise DomainError("traces must be finite")
    return vals


def bc_residual(spec: ExtensionSpec, traces) -> np.ndarray:
    """Absolute residual of each boundary condition of ``spec``.

    Parameters
    ----------
    spec : ExtensionSpec
    traces : BoundaryTraces or sequence
        ``(g0-, g0+, g1-, g1+)``.

    Returns
    -------
    ndarray of shape (2,)
        Zero exactly when the traces satisfy the conditions.
    """
    g0m, g0p, g1m, g1p = _traces(traces)
    v = spec.variant
    if v == "Friedrichs":
        res = (g0m, g0p)
    elif v == "IR":
        res = (g0m, g1p - spec.gamma * g0p)
    elif v == "IL":
        res = (g1m - spec.gamma * g0m, g0p)
    elif v == "IIa":
        res = (g0p - spec.a * g0m, g1m + spec.a.conjugate() * g1p - spec.gamma * g0m)
    else:
        m = spec.matrix
        res = (
            g1m - m.g1 * g0m - complex(m.g2, m.g3) * g0p,
            g1p - complex(m.g2, -m.g3) * g0m - m.g4 * g0p,
        )
    return np.abs(np.array(res, dtype=complex))


def is_nonnegative(spec: ExtensionSpec) -> bool:
    """Non-negativity criterion for the extension.

    Friedrichs is always non-negative; I_R, I_L and II_a iff ``gamma >= 0``;
    III iff ``g1 + g4 > 0`` and ``g1 g4 >= g2^2 + g3^2``.  The criterion for
    III is applied as stated, so the zero matrix is reported as not
    non-negative; that case raises a :class:`CriterionWarning`.
    """
    v = spec.variant
    if v == "Friedrichs":
        return True
    if v in ("IR", "IL", "IIa"):
        return spec.gamma >= 0.0
    m = spec.matrix
    if m.is_zero():
        warnings.warn(
            "Gamma = 0 is a non-negative matrix but fails the strict trace condition",
            CriterionWarning,
            stacklevel=2,
        )
    return (m.g1 + m.g4 > 0.0) and (m.g1 * m.g4 >= m.g2**2 + m.g3**2)


def bridging_spec() -> ExtensionSpec:
    """The bridging protocol, II_a with ``a = 1`` and ``gamma = 0``."""
    return ExtensionSpec.iia(1.0, 0.0)
