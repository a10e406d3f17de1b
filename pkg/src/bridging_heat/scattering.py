"""Transmission and reflection coefficients of the type-II_a protocols.

For energy ``E > 0`` write ``A = E^((1+alpha)/2) Gamma((1-alpha)/2)`` and
``B = gamma 2^(1+alpha) Gamma((3+alpha)/2)``.  Then

    T = |A (1 + e^(i pi alpha)) conj(a)|^2 / |D|^2
    R = |A (1 - |a|^2 e^(i pi alpha)) + i B e^(i pi alpha/2)|^2 / |D|^2
    D = A (1 + |a|^2) + i B e^(i pi alpha/2).

``A`` spans many decades over the energies of interest, so both ratios are
evaluated after dividing through by ``max(A, |B|)``, with ``A`` handled in
logarithms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .exceptions import DomainError
from .resolvent import Alpha, _alpha
from .special_functions import _cospi, _sinpi, gamma_real

__all__ = [
    "ExtensionParamsIIa",
    "transmission",
    "reflection",
    "reflectionless_energy",
    "high_energy_limits",
    "low_energy_limits",
    "bridging_coefficients",
    "UNIT_MODULUS_TOL",
]

UNIT_MODULUS_TOL = 1.0e-12


@dataclass(frozen=True)
class ExtensionParamsIIa:
    """Parameters ``a`` (complex) and ``gamma`` (real) of a type-II_a protocol."""

    a: complex = 1.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        a, g = complex(self.a), float(self.gamma)
        if not (cmath.isfinite(a) and math.isfinite(g)):
            raise DomainError("protocol parameters must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "gamma", g)


def _params(p) -> ExtensionParamsIIa:
    if isinstance(p, ExtensionParamsIIa):
        return p
    if isinstance(p, tuple):
        return ExtensionParamsIIa(*p)
    raise DomainError("expected ExtensionParamsIIa or an (a, gamma) tuple")


def _energy(e: float) -> float:
    e = float(e)
    if not (math.isfinite(e) and e > 0):
        raise DomainError(f"energy must be positive, got {e!r}")
    return e


def _scaled_pieces(a: Alpha, p: ExtensionParamsIIa, e: float) -> tuple[float, float]:
    """``(A, B) / max(A, |B|)``."""
    log_a = 0.5 * (1.0 + a.alpha) * math.log(e) + math.log(gamma_real(0.5 * (1.0 - a.alpha)))
    b = p.gamma * 2.0 ** (1.0 + a.alpha) * gamma_real(0.5 * (3.0 + a.alpha))
    if b == 0.0:
        return 1.0, 0.0
    log_b = math.log(abs(b))
    if log_a >= log_b:
        return 1.0, math.copysign(math.exp(log_b - log_a), b)
    return math.exp(log_a - log_b), math.copysign(1.0, b)


def _denominator(a: Alpha, p: ExtensionParamsIIa, big_a: float, big_b: float) -> float:
    mod2 = abs(p.a) ** 2
    c, s = _cospi(a.alpha / 2.0), _sinpi(a.alpha / 2.0)
    # D = A (1 + |a|^2) - B sin(pi alpha/2) + i B cos(pi alpha/2)
    re = big_a * (1.0 + mod2) - big_b * s
    im = big_b * c
    return re * re + im * im


def transmission(a, p, e: float) -> float:
    """Transmitted flux fraction ``T`` at energy ``e``.

    Parameters
    ----------
    a : Alpha or float
    p : ExtensionParamsIIa or (a, gamma)
    e : float
        Positive energy.

    Returns
    -------
    float
        A value in ``[0, 1]``.

    Examples
    --------
    >>> round(transmission(0.5, (1.0, 0.0), 3.0), 12)
    0.5
    """
    a, p, e = _alpha(a), _params(p), _energy(e)
    big_a, big_b = _scaled_pieces(a, p, e)
    # |1 + e^(i pi alpha)|^2 = 4 cos^2(pi alpha / 2)
    num = big_a**2 * 4.0 * _cospi(a.alpha / 2.0) ** 2 * abs(p.a) ** 2
    return num / _denominator(a, p, big_a, big_b)


def reflection(a, p, e: float) -> float:
    """Reflected flux fraction ``R`` at energy ``e``, from its own formula."""
    a, p, e = _alpha(a), _params(p), _energy(e)
    big_a, big_b = _scaled_pieces(a, p, e)
    mod2 = abs(p.a) ** 2
    c, s = _cospi(a.alpha / 2.0), _sinpi(a.alpha / 2.0)
    cc, ss = _cospi(a.alpha), _sinpi(a.alpha)
    # A (1 - |a|^2 e^(i pi alpha)) + i B e^(i pi alpha / 2)
    re = big_a * (1.0 - mod2 * cc) - big_b * s
    im = -big_a * mod2 * ss + big_b * c
    return (re * re + im * im) / _denominator(a, p, big_a, big_b)


def reflectionless_energy(a, p) -> float | None:
    """Energy at which ``R`` vanishes, or ``None`` outside its regime.

    The regime is ``0 < alpha < 1``, ``|a| = 1`` (to ``1e-12``) and
    ``gamma > 0``; there ``E* = (gamma 2^alpha Gamma((3+alpha)/2) /
    (Gamma((1-alpha)/2) sin(pi alpha/2)))^(2/(1+alpha))``.
    """
    a, p = _alpha(a), _params(p)
    if not (a.alpha > 0.0 and abs(abs(p.a) - 1.0) <= UNIT_MODULUS_TOL and p.gamma > 0.0):
        return None
    base = (
        p.gamma * 2.0**a.alpha * gamma_real(0.5 * (3.0 + a.alpha))
        / (gamma_real(0.5 * (1.0 - a.alpha)) * _sinpi(a.alpha / 2.0))
    )
    return base ** (2.0 / (1.0 + a.alpha))


def high_energy_limits(a, p) -> tuple[float, float]:
    """``(T, R)`` as ``E -> inf``; independent of ``gamma``."""
    a, p = _alpha(a), _params(p)
    m2 = abs(p.a) ** 2
    den = (1.0 + m2) ** 2
    cc = _cospi(a.alpha)
    return 2.0 * m2 * (1.0 + cc) / den, (1.0 + m2 * m2 - 2.0 * m2 * cc) / den


def low_energy_limits(a, p) -> tuple[float, float]:
    """``(T, R)`` as ``E -> 0``, which is ``(0, 1)`` whenever ``gamma != 0``.

    Raises
    ------
    DomainError
        For ``gamma == 0``, where the coefficients do not depend on ``E``.
    """
    _alpha(a)
    p = _params(p)
    if p.gamma == 0.0:
        raise DomainError("low-energy limit needs gamma != 0; at gamma = 0 T and R are constant")
    return 0.0, 1.0


def bridging_coefficients(a) -> tuple[float, float]:
    """``((1 + cos pi alpha)/2, (1 - cos pi alpha)/2)`` for the bridging protocol."""
    a = _alpha(a)
    cc = _cospi(a.alpha)
    return 0.5 * (1.0 + cc), 0.5 * (1.0 - cc)
