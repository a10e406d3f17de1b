"""Heat kernel of the bridging operator by numerical inverse Laplace transform.

The propagator is recovered from the resolvent through

    K(t; x, y) = (1 / 2 pi i) int_Gamma exp(-z t) R(z; x, y) dz,

with ``Gamma`` running upward to the left of the spectrum ``[0, inf)``.
Three contours are offered.  In the variable ``s = -z`` the Talbot and
hyperbolic contours wrap the negative real axis and converge geometrically
in the node count; the vertical contour is the line ``Re z = sigma < 0``
whose far ends are bent into the right half-plane so that ``exp(-z t)``
decays along them (a Cauchy deformation that leaves the integral unchanged
and makes it absolutely convergent).

Every rule is stored with ``exp(-z t)`` folded into its weights, so that
``f(t) ~ sum_j w_j F(z_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .exceptions import ContourError, ConvergenceError, DomainError, ImaginaryResidueError
from .resolvent import (
    Alpha,
    KappaSpec,
    SignedCoord,
    SpectralPoint,
    _alpha,
    _coords,
    _p_scaled,
    _q_scaled,
    coupling,
)

__all__ = [
    "CONTOUR_KINDS",
    "CONTOUR_DEFAULTS",
    "Contour",
    "QuadratureRule",
    "HeatKernelRequest",
    "KernelValue",
    "inverse_laplace",
    "heat_kernel",
    "kernel_blocks",
]

CONTOUR_KINDS = ("talbot", "hyperbolic", "vertical")

CONTOUR_DEFAULTS = {
    "nodes": 64,
    "max_nodes": 1024,
    "doubling_tol": 1.0e-8,
    "imag_tol": 1.0e-8,
    "talbot_scale": 32.0,
    "hyperbolic_scale": 32.0,
    "vertical_abscissa": -1.0,
    "vertical_height": 10.0,
    "vertical_angle": math.pi / 4.0,
    "vertical_panel": 0.5,
    "vertical_tail_decay": 40.0,
}

# optimised Talbot shape (cotangent contour)
_TALBOT = (0.5017, 0.6407, 0.6122, 0.2645)
# optimised hyperbola: s(u) = mu (1 + sin(i u - a)), |u| <= U, mu = c M / t
_HYPERBOLA = (1.1721, 1.0818, 4.4921)
# overflow guard for forming P and Q unscaled
_TAME_EXPONENT = 300.0


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes ``z``, their roots ``sqrt_z`` (``Im > 0``) and weights.

    The weights already contain the factor ``exp(-z t)``.
    """

    z: np.ndarray
    sqrt_z: np.ndarray
    weights: np.ndarray
    t: float

    def __len__(self) -> int:
        return self.z.size


@dataclass(frozen=True)
class Contour:
    """Integration contour for the inverse Laplace transform.

    Parameters
    ----------
    kind : {"talbot", "hyperbolic", "vertical"}
    nodes : int
        Starting node count; doubled until the result settles.  For the
        vertical contour ``nodes // 4`` Gauss points go on each panel.
    params : tuple of float
        Talbot and hyperbolic: ``(M,)``, the scale of the contour in units
        of ``1/t``.  Vertical: ``(sigma, height, angle)``, the abscissa of
        the line, the half-height of its straight part and the angle of the
        bent tails.
    """

    kind: str = "talbot"
    nodes: int = CONTOUR_DEFAULTS["nodes"]
    params: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in CONTOUR_KINDS:
            raise DomainError(f"unknown contour kind {self.kind!r}")
        if int(self.nodes) != self.nodes or self.nodes < 8:
            raise DomainError("contour needs an integer node count of at least 8")
        params = tuple(float(p) for p in self.params) or self._default_params()
        if self.kind == "vertical":
            if len(params) != 3:
                raise DomainError("vertical contour takes (sigma, height, angle)")
            sigma, height, angle = params
            if not sigma < 0:
                raise DomainError("vertical contour needs a negative abscissa")
            if not (height > 0 and 0 < angle < math.pi / 2):
                raise DomainError("vertical contour height or angle out of range")
        elif len(params) != 1 or not params[0] > 0:
            raise DomainError(f"{self.kind} contour takes one positive scale")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "nodes", int(self.nodes))

    def _default_params(self) -> tuple:
        if self.kind == "talbot":
            return (CONTOUR_DEFAULTS["talbot_scale"],)
        if self.kind == "hyperbolic":
            return (CONTOUR_DEFAULTS["hyperbolic_scale"],)
        return (
            CONTOUR_DEFAULTS["vertical_abscissa"],
            CONTOUR_DEFAULTS["vertical_height"],
            CONTOUR_DEFAULTS["vertical_angle"],
        )

    def with_nodes(self, nodes: int) -> "Contour":
        return Contour(self.kind, nodes, self.params)

    def rule(self, t: float, nodes: int | None = None) -> QuadratureRule:
        """Quadrature rule for time ``t``.

        Raises
        ------
        ContourError
            If a node touches the spectrum or the square-root branch jumps
            between neighbouring nodes.
        """
        t = float(t)
        if not (math.isfinite(t) and t > 0):
            raise DomainError(f"t must be positive, got {t!r}")
        n = self.nodes if nodes is None else int(nodes)
        z, dz = _shape(self.kind, self.params, t, n)
        k = _checked_roots(z)
        w = dz * np.exp(-z * t)
        for arr in (z, k, w):
            arr.setflags(write=False)
        return QuadratureRule(z=z, sqrt_z=k, weights=w, t=t)

    def describe(self) -> dict:
        return {"kind": self.kind, "nodes": self.nodes, "params": list(self.params)}


@lru_cache(maxsize=64)
def _shape_cached(kind: str, params: tuple, t: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    if kind == "talbot":
        return _talbot(params[0], t, n)
    if kind == "hyperbolic":
        return _hyperbolic(params[0], t, n)
    return _vertical(*params, t, n)


def _shape(kind, params, t, n):
    z, dz = _shape_cached(kind, params, t, n)
    return z.copy(), dz.copy()


def _talbot(scale: float, t: float, n: int):
    # nodes are ordered along the contour; dz already carries 1/(2 pi i)
    c1, c2, c3, c4 = _TALBOT
    theta = -math.pi + (np.arange(n) + 0.5) * (2.0 * math.pi / n)
    mu = scale / t
    cot = 1.0 / np.tan(c2 * theta)
    s = mu * (c1 * theta * cot - c3 + 1j * c4 * theta)
    ds = mu * (c1 * cot - c1 * c2 * theta / np.sin(c2 * theta) ** 2 + 1j * c4)
    return -s, ds * (2.0 * math.pi / n) / (2j * math.pi)


def _hyperbolic(scale: float, t: float, n: int):
    shift, half_width, factor = _HYPERBOLA
    step = 2.0 * half_width / n
    u = -half_width + (np.arange(n) + 0.5) * step
    mu = factor * scale / t
    s = mu * (1.0 + np.sin(1j * u - shift))
    ds = mu * 1j * np.cos(1j * u - shift)
    return -s, ds * step / (2j * math.pi)


def _panel_breaks(length: float, first: float, growth: float) -> np.ndarray:
    """Panel end points on ``[0, length]``, lengths growing geometrically."""
    pts = [0.0]
    while pts[-1] < length:
        pts.append(min(length, pts[-1] + max(first, growth * pts[-1])))
    return np.array(pts)


def _gauss_panels(breaks: np.ndarray, per_panel: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(per_panel)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    mid, half = (lo + hi) / 2.0, (hi - lo) / 2.0
    return (mid + half * x).ravel(), (half * w).ravel()


def _vertical(sigma: float, height: float, angle: float, t: float, n: int):
    per_panel = max(4, n // 4)
    panel = CONTOUR_DEFAULTS["vertical_panel"]
    # straight part z = sigma + i y, |y| <= height
    m = max(2, math.ceil(2.0 * height / panel))
    y, wy = _gauss_panels(np.linspace(-height, height, m + 1), per_panel)
    line_z = sigma + 1j * y
    line_dz = 1j * wy
    # tails z = sigma +- i height + r exp(+-i angle), where exp(-z t) decays
    reach = CONTOUR_DEFAULTS["vertical_tail_decay"] / (t * math.cos(angle))
    r, wr = _gauss_panels(_panel_breaks(reach, panel, 0.25), per_panel)
    up = np.exp(1j * angle)
    top_z = sigma + 1j * height + r * up
    top_dz = up * wr
    # lower tail runs inward, toward the line
    bot_z = np.conj(top_z)[::-1]
    bot_dz = -np.conj(up) * wr[::-1]
    z = np.concatenate([bot_z, line_z, top_z])
    dz = np.concatenate([bot_dz, line_dz, top_dz])
    return z, dz / (2j * math.pi)


def _checked_roots(z: np.ndarray) -> np.ndarray:
    """``sqrt(z)`` with ``Im > 0`` at every node, continuous along the contour."""
    if np.any((z.imag == 0) & (z.real >= 0)):
        raise ContourError("contour node on the spectrum [0, inf)")
    k = 1j * np.sqrt(-z)
    if np.any(k.imag <= 0):
        raise ContourError("square-root branch left the upper half-plane")
    # a branch jump flips the sign, so neighbouring roots would point apart
    if k.size > 1 and np.any((k[1:] * np.conj(k[:-1])).real <= 0):
        raise ContourError("square-root branch is discontinuous along the contour")
    return k


def _apply(F: Callable, rule: QuadratureRule) -> np.ndarray:
    vals = np.asarray(F(rule.z))
    if vals.ndim == 0:
        vals = np.broadcast_to(vals, rule.z.shape)
    if not np.all(np.isfinite(vals)):
        raise ContourError("integrand is not finite at a contour node")
    return np.tensordot(rule.weights, vals, axes=(0, 0))


def _doubling(evaluate, contour: Contour, t: float, tol: float, scale):
    """Evaluate at n and 2n nodes, doubling until the change is below ``tol``.

    ``scale`` is the reference magnitude (scalar or per entry); ``None``
    means the size of the result.
    """
    n = contour.nodes
    prev = evaluate(contour.rule(t, n))
    cap = CONTOUR_DEFAULTS["max_nodes"]
    while True:
        if 2 * n > cap:
            raise ConvergenceError(
                f"inverse Laplace transform did not settle within {cap} nodes"
            )
        n *= 2
        cur = evaluate(contour.rule(t, n))
        ref = np.max(np.abs(cur)) if scale is None else scale
        change = float(np.max(np.abs(cur - prev) / np.maximum(ref, 1e-300)))
        if change <= tol:
            return cur, n, change
        prev = cur


def _envelope(t: float, alpha: float, ax, ay) -> np.ndarray:
    """Reference size of ``K(t; x, y)``: the Gaussian peak times the
    ``|x|^(-alpha/2) |y|^(-alpha/2)`` growth at the origin."""
    grow = np.maximum(np.minimum(ax, 1.0) * np.minimum(ay, 1.0), 1e-300) ** (-alpha / 2.0)
    return grow / math.sqrt(4.0 * math.pi * t)


def inverse_laplace(
    F: Callable,
    t: float,
    contour: Contour | None = None,
    tol: float = CONTOUR_DEFAULTS["doubling_tol"],
    scale: float | None = None,
):
    """Bromwich integral ``(1 / 2 pi i) int exp(-z t) F(z) dz``.

    Parameters
    ----------
    F : callable
        Vectorised in ``z``; may return extra trailing dimensions.
    t : float
        Positive time.
    contour : Contour, optional
        Defaults to a Talbot contour with 64 nodes.
    tol : float
        Allowed change under node doubling, relative to ``scale``.
    scale : float, optional
        Reference magnitude for ``tol``; defaults to the size of the result.

    Returns
    -------
    complex or ndarray

    Raises
    ------
    ConvergenceError
        If doubling up to 1024 nodes does not settle the value.
    ContourError
        If ``F`` is not finite at a node.

    Examples
    --------
    >>> round(inverse_laplace(lambda z: 1 / (1 - z), 1.0).real, 9)
    0.367879441
    """
    contour = contour or Contour()
    value, _, _ = _doubling(lambda rule: _apply(F, rule), contour, t, tol, scale)
    return complex(value) if np.ndim(value) == 0 else value


# --- kernel -----------------------------------------------------------------


def _node_kernel(a: Alpha, kap: complex, k: complex, ax, ay, same) -> np.ndarray:
    """``R(z; x, y)`` at one node for folded coordinates."""
    s = _FastPoint(k)
    px = _p_scaled(a, s, ax)
    py = _p_scaled(a, s, ay)
    vals = kap * a.coupling_phase * px * py * np.exp(1j * k * (ax + ay))
    if np.any(same):
        lo = np.minimum(ax[same], ay[same])
        hi = np.maximum(ax[same], ay[same])
        q = _q_scaled(a, s, lo)
        p = np.where(hi == ax[same], px[same], py[same])
        vals[same] += 0.25j * math.pi * q * p * np.exp(1j * k * (hi - lo))
    return vals


class _FastPoint:
    """Minimal stand-in for :class:`SpectralPoint` on validated contour nodes."""

    __slots__ = ("sqrt_z", "z")

    def __init__(self, k: complex) -> None:
        self.sqrt_z = complex(k)
        self.z = self.sqrt_z**2


def _kernel_sum(a: Alpha, kap: complex, ax, ay, same, rule: QuadratureRule) -> np.ndarray:
    total = np.zeros(ax.shape, dtype=complex)
    for k, w in zip(rule.sqrt_z, rule.weights):
        vals = _node_kernel(a, kap, k, ax, ay, same)
        if not np.all(np.isfinite(vals)):
            raise ContourError("resolvent kernel not finite at a contour node")
        total += w * vals
    return total


@dataclass(frozen=True)
class KernelValue:
    """Heat-kernel values with quadrature diagnostics.

    Attributes
    ----------
    value : float or ndarray
        Real part of the contour integral.
    imag_residue : float
        Largest ``|Im|`` over the requested points.
    nodes : int
        Node count at which the doubling test passed.
    doubling_change : float
        Largest change under the last doubling.
    """

    value: object
    imag_residue: float
    nodes: int
    doubling_change: float


def heat_kernel(
    a,
    t: float,
    x,
    y,
    contour: Contour | None = None,
    kappa: KappaSpec = "calibrated",
    full_output: bool = False,
    check_imag: bool = True,
):
    """Bridging heat kernel ``K(t; x, y)``.

    Parameters
    ----------
    a : Alpha or float
    t : float
        Positive time.
    x, y : float, SignedCoord or array_like
        Nonzero coordinates; arrays broadcast.
    contour : Contour, optional
        Talbot with 64 nodes by default.
    kappa : complex or {"calibrated", "verbatim"}
    full_output : bool
        Return a :class:`KernelValue` instead of the bare value.
    check_imag : bool
        Raise when the imaginary residue exceeds
        ``1e-8 max(|K|, t^-1/2)``.

    Returns
    -------
    float, ndarray or KernelValue

    Raises
    ------
    ImaginaryResidueError
        If the contour integral is not real to tolerance.
    """
    a = _alpha(a)
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"t must be positive, got {t!r}")
    contour = contour or Contour()
    kap = coupling(a, kappa)
    x, y = np.broadcast_arrays(_coords(x), _coords(y))
    shape = x.shape
    xr, yr = np.atleast_1d(x).ravel(), np.atleast_1d(y).ravel()
    ax, ay = np.abs(xr), np.abs(yr)
    same = np.sign(xr) == np.sign(yr)
    scale = _envelope(t, a.alpha, ax, ay)
    raw, nodes, change = _doubling(
        lambda rule: _kernel_sum(a, kap, ax, ay, same, rule),
        contour, t, CONTOUR_DEFAULTS["doubling_tol"], scale,
    )
    residue = float(np.max(np.abs(raw.imag)))
    floor = scale * math.sqrt(4.0 * math.pi)
    bound = CONTOUR_DEFAULTS["imag_tol"] * np.maximum(np.abs(raw.real), floor)
    if check_imag and np.any(np.abs(raw.imag) > bound):
        raise ImaginaryResidueError(
            f"heat kernel imaginary residue {residue:.3e} exceeds tolerance; "
            "check the contour or the coupling mode"
        )
    real = raw.real.reshape(shape)
    value = float(real) if real.ndim == 0 else real
    if full_output:
        return KernelValue(value, residue, nodes, change)
    return value


@dataclass(frozen=True)
class HeatKernelRequest:
    """Bundle of the inputs of :func:`heat_kernel`."""

    a: Alpha
    t: float
    x: SignedCoord
    y: SignedCoord
    contour: Contour = Contour()

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t) and self.t > 0):
            raise DomainError("t must be positive")

    def evaluate(self, kappa: KappaSpec = "calibrated", full_output: bool = False):
        return heat_kernel(self.a, self.t, self.x, self.y, self.contour, kappa, full_output)


# --- kernel matrices on a half grid ------------------------------------------


def _blocks_for_rule(a: Alpha, kap: complex, r: np.ndarray, rule: QuadratureRule):
    """Same-side and cross blocks, summed over the rule, as complex matrices."""
    n = r.size
    coup = kap * a.coupling_phase
    # Q grows like exp(Im k r); form it unscaled only when that cannot overflow
    tame = float(np.max(rule.sqrt_z.imag)) * float(r[-1]) < _TAME_EXPONENT
    if tame:
        pm = np.empty((n, len(rule)), dtype=complex)
        qm = np.empty((n, len(rule)), dtype=complex)
        for j, k in enumerate(rule.sqrt_z):
            s = _FastPoint(k)
            phase = np.exp(1j * k * r)
            pm[:, j] = _p_scaled(a, s, r) * phase
            qm[:, j] = _q_scaled(a, s, r) / phase
        if not (np.all(np.isfinite(pm)) and np.all(np.isfinite(qm))):
            raise ContourError("resolvent factors not finite at a contour node")
        # only the upper triangle (row <= column) of Q P^T is bounded
        green = (qm * (0.25j * math.pi * rule.weights)) @ pm.T
        green = np.triu(green) + np.triu(green, 1).T
        cross = (pm * (coup * rule.weights)) @ pm.T
        return green + cross, cross
    same = np.zeros((n, n), dtype=complex)
    cross = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n)
    gap = r[iu[1]] - r[iu[0]]
    for k, w in zip(rule.sqrt_z, rule.weights):
        s = _FastPoint(k)
        ps = _p_scaled(a, s, r)
        qs = _q_scaled(a, s, r)
        p = ps * np.exp(1j * k * r)
        rank = (coup * w) * np.outer(p, p)
        g = np.zeros((n, n), dtype=complex)
        g[iu] = (qs[iu[0]] * ps[iu[1]]) * np.exp(1j * k * gap)
        g = g + np.triu(g, 1).T
        same += 0.25j * math.pi * w * g + rank
        cross += rank
    return same, cross


def kernel_blocks(
    a,
    t: float,
    r: np.ndarray,
    contour: Contour | None = None,
    kappa: KappaSpec = "calibrated",
    tol: float = CONTOUR_DEFAULTS["doubling_tol"],
):
    """Heat kernel on a positive half grid as two real blocks.

    For points ``r_i`` on one side, ``K(t; +-r_i, +-r_j) = same[i, j]`` and
    ``K(t; +-r_i, -+r_j) = cross[i, j]``.

    Returns
    -------
    same, cross : ndarray
        Real matrices.
    info : dict
        ``nodes``, ``doubling_change`` and ``imag_residue``, the last two
        relative to the kernel's size ``|x y|^(-alpha/2) / sqrt(4 pi t)``.
    """
    a = _alpha(a)
    contour = contour or Contour()
    kap = coupling(a, kappa)
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or np.any(r <= 0) or np.any(np.diff(r) <= 0):
        raise DomainError("half grid must be positive and increasing")
    scale = _envelope(t, a.alpha, r[:, None], r[None, :])

    def evaluate(rule):
        same, cross = _blocks_for_rule(a, kap, r, rule)
        return np.stack([same, cross])

    raw, nodes, change = _doubling(evaluate, contour, t, tol, scale)
    residue = float(np.max(np.abs(raw.imag) / scale))
    info = {"nodes": nodes, "doubling_change": change, "imag_residue": residue}
    return raw[0].real, raw[1].real, info
