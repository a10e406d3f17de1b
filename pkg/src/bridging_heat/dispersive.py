"""Time-decay exponents of ``||u(t)||_p`` and ``||d_x u(t)||_p``.

For the free heat flow ``||u(t)||_p <= C t^(-(1/r - 1/p)/2) ||phi||_r`` and the
gradient gains a further ``t^(-1/2)``.  The classical exponents are checked
here against fits of the closed-form flow; for the bridging flow the fitted
exponents are reported with their residual and nothing is asserted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .evolve import InitialDatum, Propagator, classical_heat_evolve
from .exceptions import DegenerateFitError, DomainError, GridWarning
from .grid import SampledFunction, SpatialGrid, lp_norm

__all__ = [
    "DecayFit",
    "DecayStudy",
    "DECAY_WINDOW",
    "RICHARDSON_TOL",
    "classical_exponent",
    "decay_rate_fit",
    "gradient_norm",
    "benchmark_width",
    "benchmark_grid",
    "decay_study",
    "spacetime_norm",
]

DECAY_WINDOW = (1.0, 16.0)
RICHARDSON_TOL = 0.05
# fraction of the asymptotic slope reached by the benchmark Gaussians
SATURATION = 0.995
MIN_SAMPLES = 5


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit ``value ~ prefactor * t^exponent``.

    Attributes
    ----------
    exponent : float
        Fitted slope of ``log value`` against ``log t`` (negative for decay).
    prefactor : float
    fit_residual : float
        RMS of the log residuals.
    time_window : (float, float)
    p, r : float
        Norm indices the samples refer to (``nan`` if unspecified).
    """

    exponent: float
    prefactor: float
    fit_residual: float
    time_window: tuple[float, float]
    p: float = math.nan
    r: float = math.nan

    def __post_init__(self) -> None:
        if not self.fit_residual >= 0:
            raise DomainError("fit residual must be nonnegative")
        if not self.time_window[0] < self.time_window[1]:
            raise DomainError("time window must be nondegenerate")

    def describe(self) -> dict:
        return {
            "exponent": self.exponent,
            "prefactor": self.prefactor,
            "fit_residual": self.fit_residual,
            "time_window": list(self.time_window),
            "p": self.p,
            "r": self.r,
        }


def _check_pr(p: float, r: float) -> None:
    if not (p >= 1 and r >= 1):
        raise DomainError("norm indices must be >= 1")
    if r > p:
        raise DomainError("the L^r -> L^p estimate needs r <= p")


def classical_exponent(p: float, r: float, gradient: bool = False) -> float:
    """Signed decay exponent ``-(1/r - 1/p)/2``, minus ``1/2`` for gradients."""
    _check_pr(p, r)
    rate = 0.5 * (1.0 / r - 1.0 / p)
    return -(rate + 0.5) if gradient else -rate


def decay_rate_fit(norms, p: float = math.nan, r: float = math.nan) -> DecayFit:
    """Fit a power law to ``(t, value)`` samples.

    Parameters
    ----------
    norms : sequence of (float, float)
        At least five samples with strictly increasing ``t > 0`` and
        positive values.
    p, r : float, optional
        Recorded on the result.

    Returns
    -------
    DecayFit

    Raises
    ------
    DegenerateFitError
        On too few samples, repeated or unordered times, or values ``<= 0``.

    Examples
    --------
    >>> fit = decay_rate_fit([(t, t ** -0.5) for t in (1, 2, 4, 8, 16)])
    >>> round(fit.exponent, 10)
    -0.5
    """
    data = np.asarray(list(norms), dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < MIN_SAMPLES:
        raise DegenerateFitError(f"need at least {MIN_SAMPLES} (t, value) samples")
    t, v = data[:, 0], data[:, 1]
    if not np.all(np.isfinite(data)):
        raise DegenerateFitError("samples must be finite")
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise DegenerateFitError("times must be positive and strictly increasing")
    if np.any(v <= 0):
        raise DegenerateFitError("values must be positive")
    lt, lv = np.log(t), np.log(v)
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = lv - (slope * lt + intercept)
    return DecayFit(
        exponent=float(slope),
        prefactor=float(math.exp(intercept)),
        fit_residual=float(math.sqrt(np.mean(resid**2))),
        time_window=(float(t[0]), float(t[-1])),
        p=float(p),
        r=float(r),
    )


def _side_derivative(s: np.ndarray, f: np.ndarray, step: int) -> np.ndarray:
    """d f / d s on one side, using points ``j - step, j, j + step``.

    One-sided three-point formulas are used where a neighbour is missing,
    so no stencil reaches across the origin.
    """
    n = s.size
    d = np.empty(n, dtype=complex)
    for j in range(n):
        if j - step < 0:
            i0, i1, i2 = j, j + step, j + 2 * step
        elif j + step >= n:
            i0, i1, i2 = j - 2 * step, j - step, j
        else:
            i0, i1, i2 = j - step, j, j + step
        x0, x1, x2 = s[i0], s[i1], s[i2]
        xj = s[j]
        # derivative of the Lagrange interpolant through the three points
        c0 = (2 * xj - x1 - x2) / ((x0 - x1) * (x0 - x2))
        c1 = (2 * xj - x0 - x2) / ((x1 - x0) * (x1 - x2))
        c2 = (2 * xj - x0 - x1) / ((x2 - x0) * (x2 - x1))
        d[j] = c0 * f[i0] + c1 * f[i1] + c2 * f[i2]
    return d


def _gradient(u: SampledFunction, step: int) -> tuple[np.ndarray, np.ndarray]:
    grid = u.grid
    s = grid.half
    left, right = grid.fold(u.values)
    # on the left d/dx = -d/d|x|
    return -_side_derivative(s, left, step), _side_derivative(s, right, step)


def _gradient_norm(grid: SpatialGrid, left: np.ndarray, right: np.ndarray, p: float,
                   mask: np.ndarray) -> float:
    w = grid.half_weights
    ml, mr = np.abs(left)[mask], np.abs(right)[mask]
    if math.isinf(p):
        return float(max(ml.max(), mr.max()))
    return float((np.dot(w[mask], ml**p) + np.dot(w[mask], mr**p)) ** (1.0 / p))


def gradient_norm(u: SampledFunction, p: float) -> float:
    """``L^p`` norm of the finite-difference derivative of ``u``.

    Three-point derivatives are taken separately on each side of the origin.
    For ``p = inf`` the two points adjacent to the origin are left out; for
    finite ``p`` the graded-mesh weights are used everywhere.  A
    :class:`GridWarning` is raised when the norm from the stencil of twice
    the spacing differs by more than 5%.

    Parameters
    ----------
    u : SampledFunction
    p : float
        ``p >= 1`` or ``numpy.inf``.
    """
    if not (p >= 1):
        raise DomainError(f"p must be >= 1, got {p!r}")
    grid = u.grid
    n = grid.n_half
    if n < 6:
        raise DomainError("grid too small for a derivative")
    mask = np.ones(n, dtype=bool)
    if math.isinf(p):
        mask[0] = False
    fine = _gradient_norm(grid, *_gradient(u, 1), p, mask)
    coarse = _gradient_norm(grid, *_gradient(u, 2), p, mask)
    # below this both norms are rounding noise amplified by the finest cells
    finest = float(grid.half[1] - grid.half[0])
    noise = 100.0 * np.finfo(float).eps * float(np.max(np.abs(u.values))) / finest
    if max(fine, coarse) > noise and abs(fine - coarse) > RICHARDSON_TOL * fine:
        warnings.warn(
            f"gradient norm changes by {abs(fine - coarse) / fine:.1%} between stencils; "
            "grid is too coarse",
            GridWarning,
            stacklevel=2,
        )
    return fine


def benchmark_width(p: float, r: float, window: tuple = DECAY_WINDOW,
                    saturation: float = SATURATION) -> float:
    """Width of a Gaussian whose ``L^p`` decay follows the ``L^r -> L^p`` rate.

    For ``phi = exp(-x^2/w^2)`` the local log-slope of ``||u(t)||_p`` is
    ``(1/p - 1) q / 2`` with ``q = 4t / (w^2 + 4t)``.  The width is chosen so
    that ``q`` matches ``(1/r - 1/p) / (1 - 1/p)`` at the geometric middle of
    the window, clipped to ``[1 - saturation, saturation]`` at the window
    ends so that the extreme cases stay finite.
    """
    _check_pr(p, r)
    t0, t1 = window
    if p == 1.0:
        q = 0.0
    else:
        q = (1.0 / r - 1.0 / p) / (1.0 - 1.0 / p)
    if q >= saturation:
        return math.sqrt(4.0 * t0 * (1.0 - saturation) / saturation)
    if q <= 1.0 - saturation:
        return math.sqrt(4.0 * t1 * saturation / (1.0 - saturation))
    return math.sqrt(4.0 * math.sqrt(t0 * t1) * (1.0 - q) / q)


def benchmark_grid(width: float, window: tuple = DECAY_WINDOW, points: int = 1500) -> SpatialGrid:
    """Window wide enough to hold the Gaussian of ``width`` up to the last time."""
    spread = math.sqrt(width * width + 4.0 * window[1])
    L = max(12.0, 7.0 * spread)
    return SpatialGrid.build(L=L, h=L / points)


@dataclass(frozen=True)
class DecayStudy:
    """Sampled norms and their power-law fit."""

    fit: DecayFit
    times: tuple
    values: tuple
    target: float | None

    def describe(self) -> dict:
        out = self.fit.describe()
        out["target_exponent"] = self.target
        out["samples"] = [[t, v] for t, v in zip(self.times, self.values)]
        return out


def decay_study(
    datum: InitialDatum,
    p: float,
    r: float,
    times=None,
    grid: SpatialGrid | None = None,
    alpha=None,
    gradient: bool = False,
    propagator: Propagator | None = None,
) -> DecayStudy:
    """Fit the decay of ``||u(t)||_p`` (or of the gradient) over ``times``.

    Parameters
    ----------
    datum : InitialDatum
    p, r : float
        Norm indices; ``r`` only sets the classical target.
    times : sequence of float, optional
        Defaults to eight log-spaced times in ``[1, 16]``.
    grid : SpatialGrid, optional
    alpha : float or None
        ``None`` runs the classical flow; otherwise the bridging flow.
    gradient : bool
    propagator : Propagator, optional
        Reused for the bridging flow when given.

    Returns
    -------
    DecayStudy
        ``target`` is the classical exponent, or ``None`` for the bridging
        flow, where no exponent is known.
    """
    _check_pr(p, r)
    if times is None:
        times = np.geomspace(*DECAY_WINDOW, 8)
    times = [float(t) for t in times]
    if alpha is None:
        grid = grid or SpatialGrid.build()
        flow = lambda t: classical_heat_evolve(t, datum, grid)  # noqa: E731
    else:
        if propagator is None:
            grid = grid or SpatialGrid.build(alpha=float(alpha))
            propagator = Propagator(alpha, grid)
        flow = lambda t: propagator.evolve(t, datum)  # noqa: E731
    norm = (lambda u: gradient_norm(u, p)) if gradient else (lambda u: lp_norm(u, p))
    values = [norm(flow(t)) for t in times]
    fit = decay_rate_fit(zip(times, values), p=p, r=r)
    target = classical_exponent(p, r, gradient) if alpha is None else None
    return DecayStudy(fit=fit, times=tuple(times), values=tuple(values), target=target)


def spacetime_norm(times, values, q: float) -> float:
    """``(int ||u(t)||^q dt)^(1/q)`` over the sampled times by the trapezoid rule.

    A diagnostic only; nothing is asserted about it.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.size < 2 or t.shape != v.shape or not q >= 1:
        raise DomainError("need matching samples and q >= 1")
    return float(np.trapezoid(v**q, t) ** (1.0 / q))
