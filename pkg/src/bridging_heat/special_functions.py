"""Bessel functions of fractional order and the real Gamma function.

The resolvent kernel needs J_nu and Y_nu at orders nu in [1/2, 1) and
complex arguments in the closed upper half-plane, and the scattering
formulas need Gamma on (0, 2).  Evaluation regimes:

* ascending power series for ``|w| <= 12``;
* Hankel integral representation, integrated with generalized
  Gauss-Laguerre nodes, for ``12 < |w| < 20`` (and for Hankel functions
  down to ``|w| = 2.5`` off the real axis, where the series cancels);
* Hankel asymptotic expansion, truncated at its smallest term, for
  ``|w| >= 20``.

Arguments outside the first quadrant are reduced to it by conjugation and
the analytic continuation formulas of J and Y, so the principal branch
(cut along the negative real axis) is returned everywhere.

Scaled variants (``j_scaled``, ``hankel1_scaled``) remove the exponential
factor ``exp(-i w)`` or ``exp(i w)`` so that products in the resolvent
kernel can be formed without overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_genlaguerre

from .exceptions import AccuracyWarning, DomainError

__all__ = [
    "Order",
    "bessel_j",
    "bessel_y",
    "hankel1",
    "hankel1_scaled",
    "j_scaled",
    "gamma_real",
    "SERIES_RADIUS",
    "ASYMPTOTIC_RADIUS",
]

SERIES_RADIUS = 12.0
ASYMPTOTIC_RADIUS = 20.0
# Below this height off the real axis the series is still cancellation-free
# enough for Hankel functions; above it the Laguerre integral takes over.
HANKEL_SERIES_HEIGHT = 2.5
LAGUERRE_NODES = 60
ENVELOPE_ABS = 1.0e3
ENVELOPE_IMAG = 1.0e2

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


@dataclass(frozen=True)
class Order:
    """Bessel order ``nu = (1 + alpha) / 2`` used by the resolvent.

    Parameters
    ----------
    nu : float
        Order in ``[1/2, 1)``.
    """

    nu: float

    def __post_init__(self) -> None:
        if not (0.5 <= self.nu < 1.0):
            raise DomainError(f"order must lie in [1/2, 1), got {self.nu!r}")

    def __float__(self) -> float:
        return float(self.nu)


def _sinpi(x: float) -> float:
    """sin(pi x) with the argument reduced exactly before scaling by pi."""
    n = round(x)
    r = math.sin(math.pi * (x - n))
    return -r if n % 2 else r


def _cospi(x: float) -> float:
    return _sinpi(x + 0.5)


def _gamma(x: float) -> float:
    """Lanczos Gamma with reflection; valid for non-integer negative x."""
    if x < 0.5:
        s = _sinpi(x)
        if s == 0.0:
            raise DomainError(f"Gamma has a pole at {x!r}")
        return math.pi / (s * _gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS[0]
    for i, c in enumerate(_LANCZOS[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def gamma_real(x: float) -> float:
    """Gamma function for positive real arguments.

    Parameters
    ----------
    x : float
        Positive argument.

    Returns
    -------
    float
        ``Gamma(x)`` with relative error below ``1e-12``.

    Raises
    ------
    DomainError
        If ``x <= 0`` or is not finite.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"gamma_real requires x > 0, got {x!r}")
    return _gamma(x)


def _rgamma(x: float) -> float:
    """Reciprocal Gamma, zero at the poles."""
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    return 1.0 / _gamma(x)


def _nu_value(nu) -> float:
    nu = float(nu)
    if not math.isfinite(nu):
        raise DomainError("order must be finite")
    if nu == math.floor(nu):
        raise DomainError(f"integer orders are not supported, got {nu!r}")
    return nu


def _as_args(z) -> tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=complex)
    if np.any(arr == 0):
        raise DomainError("Bessel functions are evaluated only at nonzero arguments")
    if not np.all(np.isfinite(arr)):
        raise DomainError("arguments must be finite")
    return np.atleast_1d(arr), arr.ndim == 0


def _check_envelope(w: np.ndarray) -> None:
    if np.any(np.abs(w) > ENVELOPE_ABS) or np.any(np.abs(w.imag) > ENVELOPE_IMAG):
        warnings.warn(
            "argument outside the validated envelope |w| <= 1e3, |Im w| <= 1e2",
            AccuracyWarning,
            stacklevel=3,
        )


# --- regime kernels -------------------------------------------------------


def _series_j(nu: float, w: np.ndarray) -> np.ndarray:
    """Ascending series of J_nu on the principal branch."""
    half = w / 2.0
    q = -(half * half)
    term = np.full(w.shape, _rgamma(nu + 1.0), dtype=complex)
    total = term.copy()
    kmax = int(np.max(np.abs(w), initial=0.0)) + 400
    for k in range(1, kmax):
        term = term * q / (k * (k + nu))
        total += term
        if k > 2 and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return np.exp(nu * np.log(half)) * total


def _asymptotic_scaled(nu: float, w: np.ndarray, kind: int) -> np.ndarray:
    """Hankel expansion of H^(kind)_nu(w) * exp(-/+ i w)."""
    sign = 1.0 if kind == 1 else -1.0
    mu = 4.0 * nu * nu
    total = np.ones(w.shape, dtype=complex)
    term = np.ones(w.shape, dtype=complex)
    prev = np.full(w.shape, np.inf)
    active = np.ones(w.shape, dtype=bool)
    for k in range(1, 80):
        term = term * (sign * 1j) * (mu - (2 * k - 1) ** 2) / (8.0 * k * w)
        size = np.abs(term)
        # stop at the smallest term: the expansion is only asymptotic
        active &= size < prev
        total[active] += term[active]
        active &= size > 1e-17
        prev = size
        if not np.any(active):
            break
    phase = np.exp(sign * 1j * (-nu * math.pi / 2.0 - math.pi / 4.0))
    return np.sqrt(2.0 / (math.pi * w)) * phase * total


@lru_cache(maxsize=64)
def _laguerre_rule(nu: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_genlaguerre(n, nu - 0.5)
    return nodes, weights


def _laguerre_scaled(nu: float, w: np.ndarray, kind: int) -> np.ndarray:
    """Hankel integral of H^(kind)_nu(w) * exp(-/+ i w); needs nu > -1/2."""
    sign = 1.0 if kind == 1 else -1.0
    u, wt = _laguerre_rule(nu, LAGUERRE_NODES)
    integrand = (1.0 + sign * 1j * u[None, :] / (2.0 * w[:, None])) ** (nu - 0.5)
    integral = integrand @ wt
    phase = np.exp(sign * 1j * (-nu * math.pi / 2.0 - math.pi / 4.0))
    return np.sqrt(2.0 / (math.pi * w)) * phase * integral / _gamma(nu + 0.5)


def _hankel_pair_scaled_q1(nu: float, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scaled H1, H2 for first-quadrant v with |v| > SERIES_RADIUS, Re v >= 3."""
    anu = abs(nu)
    h1 = np.empty(v.shape, dtype=complex)
    h2 = np.empty(v.shape, dtype=complex)
    far = np.abs(v) >= ASYMPTOTIC_RADIUS
    near = ~far
    if np.any(far):
        h1[far] = _asymptotic_scaled(anu, v[far], 1)
        h2[far] = _asymptotic_scaled(anu, v[far], 2)
    if np.any(near):
        h1[near] = _laguerre_scaled(anu, v[near], 1)
        h2[near] = _laguerre_scaled(anu, v[near], 2)
    if nu < 0:
        h1 *= np.exp(1j * anu * math.pi)
        h2 *= np.exp(-1j * anu * math.pi)
    return h1, h2


def _jy_series(nu: float, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    jp = _series_j(nu, w)
    jm = _series_j(-nu, w)
    s, c = _sinpi(nu), _cospi(nu)
    return jp, (jp * c - jm) / s


def _jy_q1(nu: float, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """J and Y for v in the closed first quadrant."""
    j = np.empty(v.shape, dtype=complex)
    y = np.empty(v.shape, dtype=complex)
    r = np.abs(v)
    series = (r <= SERIES_RADIUS) | ((r < ASYMPTOTIC_RADIUS) & (v.real < 3.0))
    if np.any(series):
        j[series], y[series] = _jy_series(nu, v[series])
    rest = ~series
    if np.any(rest):
        vr = v[rest]
        h1s, h2s = _hankel_pair_scaled_q1(nu, vr)
        h1 = h1s * np.exp(1j * vr)
        h2 = h2s * np.exp(-1j * vr)
        j[rest] = 0.5 * (h1 + h2)
        y[rest] = (h1 - h2) / 2j
    return j, y


def _jy(nu: float, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """J_nu and Y_nu on the principal branch for any nonzero w."""
    j = np.empty(w.shape, dtype=complex)
    y = np.empty(w.shape, dtype=complex)
    small = np.abs(w) <= SERIES_RADIUS
    if np.any(small):
        j[small], y[small] = _jy_series(nu, w[small])
    big = ~small
    if not np.any(big):
        return j, y
    wb = w[big]
    jb = np.empty(wb.shape, dtype=complex)
    yb = np.empty(wb.shape, dtype=complex)
    right = wb.real >= 0
    upper = wb.imag >= 0
    c2 = 2j * _cospi(nu)
    ep = np.exp(1j * nu * math.pi)

    m = right & upper
    if np.any(m):
        jb[m], yb[m] = _jy_q1(nu, wb[m])
    m = right & ~upper
    if np.any(m):
        jq, yq = _jy_q1(nu, np.conj(wb[m]))
        jb[m], yb[m] = np.conj(jq), np.conj(yq)
    m = ~right & upper
    if np.any(m):
        # w = u exp(i pi) with u = -w in the fourth quadrant
        jq, yq = _jy_q1(nu, np.conj(-wb[m]))
        ju, yu = np.conj(jq), np.conj(yq)
        jb[m] = ep * ju
        yb[m] = yu / ep + c2 * ju
    m = ~right & ~upper
    if np.any(m):
        # w = u exp(-i pi) with u = -w in the first quadrant
        ju, yu = _jy_q1(nu, -wb[m])
        jb[m] = ju / ep
        yb[m] = ep * yu - c2 * ju
    j[big], y[big] = jb, yb
    return j, y


# --- public evaluators ----------------------------------------------------


def _finish(values: np.ndarray, scalar: bool):
    return complex(values[0]) if scalar else values


def bessel_j(nu, z):
    """Bessel function of the first kind J_nu(z).

    Parameters
    ----------
    nu : float or Order
        Real, non-integer order.
    z : complex or array_like
        Nonzero argument(s).

    Returns
    -------
    complex or ndarray
        Principal-branch values, same shape as ``z``.

    Raises
    ------
    DomainError
        If any argument is zero or the order is an integer.

    Warns
    -----
    AccuracyWarning
        For arguments outside ``|z| <= 1e3``, ``|Im z| <= 1e2``.
    """
    nu = _nu_value(nu)
    w, scalar = _as_args(z)
    _check_envelope(w)
    return _finish(_jy(nu, w)[0], scalar)


def bessel_y(nu, z):
    """Bessel function of the second kind Y_nu(z).

    Same conventions as :func:`bessel_j`.
    """
    nu = _nu_value(nu)
    w, scalar = _as_args(z)
    _check_envelope(w)
    return _finish(_jy(nu, w)[1], scalar)


def hankel1_scaled(nu, z):
    """Scaled Hankel function ``H1_nu(z) * exp(-i z)`` for ``Im z >= 0``.

    Parameters
    ----------
    nu : float or Order
        Real, non-integer order.
    z : complex or array_like
        Nonzero arguments in the closed upper half-plane.

    Returns
    -------
    complex or ndarray
    """
    nu = _nu_value(nu)
    w, scalar = _as_args(z)
    if np.any(w.imag < 0):
        raise DomainError("hankel1_scaled is defined here for Im z >= 0 only")
    anu = abs(nu)
    out = np.empty(w.shape, dtype=complex)
    r = np.abs(w)
    series = (r <= HANKEL_SERIES_HEIGHT) | ((r <= SERIES_RADIUS) & (w.imag <= HANKEL_SERIES_HEIGHT))
    far = (r >= ASYMPTOTIC_RADIUS) & ~series
    mid = ~series & ~far
    if np.any(series):
        ws = w[series]
        jp = _series_j(anu, ws)
        jm = _series_j(-anu, ws)
        h1 = (jm - np.exp(-1j * anu * math.pi) * jp) / (1j * _sinpi(anu))
        out[series] = h1 * np.exp(-1j * ws)
    if np.any(far):
        out[far] = _asymptotic_scaled(anu, w[far], 1)
    if np.any(mid):
        out[mid] = _laguerre_scaled(anu, w[mid], 1)
    if nu < 0:
        out *= np.exp(1j * anu * math.pi)
    return _finish(out, scalar)


def hankel1(nu, z):
    """Hankel function of the first kind for ``Im z >= 0``."""
    w, scalar = _as_args(z)
    _check_envelope(w)
    return _finish(np.asarray(hankel1_scaled(nu, w)) * np.exp(1j * w), scalar)


def j_scaled(nu, z):
    """Scaled Bessel function ``J_nu(z) * exp(i z)`` for ``Im z >= 0``.

    Bounded in the upper half-plane, unlike ``J_nu`` itself.
    """
    nu = _nu_value(nu)
    w, scalar = _as_args(z)
    if np.any(w.imag < 0):
        raise DomainError("j_scaled is defined here for Im z >= 0 only")
    out = np.empty(w.shape, dtype=complex)
    small = np.abs(w) <= SERIES_RADIUS
    if np.any(small):
        ws = w[small]
        out[small] = _series_j(nu, ws) * np.exp(1j * ws)
    big = ~small
    if np.any(big):
        wb = w[big]
        right = wb.real >= 0
        # reflect the second quadrant onto the first: J(w) = e^{i nu pi} conj(J(-conj w))
        v = np.where(right, wb, -np.conj(wb))
        vals = _j_scaled_q1(nu, v)
        out[big] = np.where(right, vals, np.exp(1j * nu * math.pi) * np.conj(vals))
    return _finish(out, scalar)


def _j_scaled_q1(nu: float, v: np.ndarray) -> np.ndarray:
    out = np.empty(v.shape, dtype=complex)
    series = (np.abs(v) < ASYMPTOTIC_RADIUS) & (v.real < 3.0)
    if np.any(series):
        vs = v[series]
        out[series] = _series_j(nu, vs) * np.exp(1j * vs)
    rest = ~series
    if np.any(rest):
        vr = v[rest]
        h1s, h2s = _hankel_pair_scaled_q1(nu, vr)
        out[rest] = 0.5 * (h1s * np.exp(2j * vr) + h2s)
    return out
