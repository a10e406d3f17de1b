"""Signed spatial grids graded toward the origin, and functions sampled on them.

The grid covers ``[-L, L]`` minus the origin and is symmetric under
``x -> -x``.  On each side it is uniform with spacing ``h`` down to the
core radius ``x_c = core * h`` and geometric (ratio ``r``) below it, down
to roughly ``x_min``.  Quadrature weights come from product integration
exact for ``{1, l, l^2, y, y^2}`` on the geometric cells and the first
uniform cells, where

    l(y) = (y^(-alpha/2) - 1) / (alpha/2)      (-> -log y at alpha = 0)

so both ``|y|^(-alpha/2)`` (solutions) and ``|y|^(-alpha)`` (products of
solutions) are integrated exactly, without ill-conditioning as
``alpha -> 0``.  Composite Simpson takes over further out.  The cell
``[0, y_0]`` uses a two-node Radau-type rule with an extra interior node,
exact for ``{1, l, l^2}`` and with positive weights for every alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError

__all__ = [
    "GRID_DEFAULTS",
    "SpatialGrid",
    "SampledFunction",
    "lp_norm",
    "integral",
    "weighted_mass",
]

# uniform intervals next to the core that still get product weights
PRODUCT_CELLS = 16

GRID_DEFAULTS = {
    "L": 12.0,
    "h": 0.02,
    "ratio": 0.7,
    "x_min": 1.0e-5,
    "core": 4,
}


def _ell(y: np.ndarray, beta: float) -> np.ndarray:
    logy = np.log(y)
    if beta == 0.0:
        return -logy
    return np.expm1(-beta * logy) / beta


def _ell_antiderivative(y: float, beta: float) -> float:
    """``int_0^y l``."""
    return y * (float(_ell(np.array(y), beta)) + 1.0) / (1.0 - beta)


def _ell2_antiderivative(y: float, beta: float) -> float:
    """``int_0^y l^2 = y [g(2b) - 2 g(b) + g(0)] / b^2`` with ``g(c) = y^-c / (1 - c)``.

    The second difference is summed as a Taylor series for small ``b``.
    """
    lam = math.log(y)
    if beta >= 0.02:
        def g(c):
            return math.exp(-c * lam) / (1.0 - c)
        return y * (g(2.0 * beta) - 2.0 * g(beta) + g(0.0)) / beta**2
    # Taylor coefficients of g are partial sums of exp(-c lam)
    total, partial, term = 0.0, 0.0, 1.0
    for n in range(200):
        if n:
            term *= -lam / n
        partial += term
        if n >= 2:
            piece = partial * (2.0**n - 2.0) * beta ** (n - 2)
            total += piece
            if n > 6 and abs(piece) <= 1e-17 * abs(total):
                break
    return y * total


def _cell_weights(nodes: np.ndarray, lo: float, hi: float, beta: float) -> np.ndarray:
    """Weights on five ``nodes`` exact over ``[lo, hi]`` for ``1, l, l^2, y, y^2``."""
    scale = nodes.max()
    u = nodes / scale
    a, b = lo / scale, hi / scale
    ell = _ell(u, beta)
    basis = np.vstack([np.ones_like(u), ell, ell * ell, u, u * u])
    moments = np.array(
        [
            b - a,
            _ell_antiderivative(b, beta) - _ell_antiderivative(a, beta),
            _ell2_antiderivative(b, beta) - _ell2_antiderivative(a, beta),
            (b * b - a * a) / 2.0,
            (b**3 - a**3) / 3.0,
        ]
    )
    return np.linalg.solve(basis, moments) * scale


def _radau_inner(beta: float) -> tuple[float, float]:
    """Interior node and its weight for ``[0, 1]`` with the other node at 1.

    Exact for ``1, y^-beta, y^-2beta``: the node is ``(1 - 2 beta)^(1/beta)``
    (``e^-2`` at ``beta = 0``) and its weight ``(1 - 2 beta) / (2 (1 - beta))``.
    """
    if beta == 0.0:
        return math.exp(-2.0), 0.5
    # log1p keeps the node accurate for tiny beta
    return math.exp(math.log1p(-2.0 * beta) / beta), (1.0 - 2.0 * beta) / (2.0 * (1.0 - beta))


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Signed grid on ``[-L, L] \\ {0}`` with positive quadrature weights.

    Use :meth:`build` rather than the raw constructor.

    Attributes
    ----------
    L : float
        Truncation half-width.
    points : ndarray
        Strictly increasing nonzero coordinates, symmetric about 0.
    weights : ndarray
        Quadrature weights matching ``points``.
    h : float
        Spacing actually used on the uniform part.
    ratio : float
        Geometric ratio of the graded core.
    core_radius : float
        Boundary between graded core and uniform part.
    alpha : float
        Singular exponent the core weights are built for.
    """

    L: float
    points: np.ndarray
    weights: np.ndarray
    h: float
    ratio: float
    core_radius: float
    alpha: float
    n_half: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_half", self.points.size // 2)
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def build(
        cls,
        L: float = GRID_DEFAULTS["L"],
        h: float = GRID_DEFAULTS["h"],
        ratio: float = GRID_DEFAULTS["ratio"],
        x_min: float = GRID_DEFAULTS["x_min"],
        alpha: float = 0.0,
        core: int = GRID_DEFAULTS["core"],
    ) -> "SpatialGrid":
        """Construct the graded grid.

        Parameters
        ----------
        L : float
            Half-width of the computational window.
        h : float
            Target uniform spacing; adjusted down so that the uniform part
            has an even number of Simpson intervals.
        ratio : float
            Geometric refinement ratio in ``(0, 1)``.
        x_min : float
            The graded core stops at the first point below ``x_min``.
        alpha : float
            Singularity parameter in ``[0, 1)`` used by the core weights.
        core : int
            Core radius in units of ``h``.
        """
        if not (L > 0 and h > 0 and 0 < ratio < 1 and x_min > 0 and core >= 1):
            raise DomainError("grid parameters out of range")
        if not (0.0 <= alpha < 1.0):
            raise DomainError(f"alpha must lie in [0, 1), got {alpha!r}")
        x_c = core * h
        if x_c >= L or x_min >= x_c:
            raise DomainError("grid too small for its core radius")
        n = math.ceil((L - x_c) / h - 1e-9)
        if n < PRODUCT_CELLS + 2:
            raise DomainError("grid too small for its core radius")
        n += (n - PRODUCT_CELLS) % 2
        h_eff = (L - x_c) / n
        uniform = x_c + h_eff * np.arange(n + 1)
        uniform[-1] = L
        n_geo = math.ceil(math.log(x_min / x_c) / math.log(ratio))
        geo = x_c * ratio ** np.arange(1, n_geo + 1)

        beta = alpha / 2.0
        inner, inner_w = _radau_inner(beta)
        half = np.concatenate([[inner * geo[-1]], geo[::-1], uniform])
        w = np.zeros_like(half)
        w[0] += inner_w * half[1]
        w[1] += (1.0 - inner_w) * half[1]

        first_simpson = n_geo + 1 + PRODUCT_CELLS
        m = n - PRODUCT_CELLS
        simpson = np.ones(m + 1)
        simpson[1:-1:2] = 4.0
        simpson[2:-1:2] = 2.0
        w[first_simpson:] += simpson * h_eff / 3.0
        for j in range(2, first_simpson + 1):
            idx = np.arange(max(1, j - 3), max(1, j - 3) + 5)
            w[idx] += _cell_weights(half[idx], half[j - 1], half[j], beta)

        points = np.concatenate([-half[::-1], half])
        weights = np.concatenate([w[::-1], w])
        if np.any(weights <= 0):
            raise DomainError("grid construction produced a non-positive weight")
        return cls(L=float(L), points=points, weights=weights, h=h_eff, ratio=ratio,
                   core_radius=x_c, alpha=float(alpha))

    @property
    def half(self) -> np.ndarray:
        """Positive coordinates in increasing order."""
        return self.points[self.n_half:]

    @property
    def half_weights(self) -> np.ndarray:
        return self.weights[self.n_half:]

    @property
    def min_abs(self) -> float:
        return float(self.half[0])

    def fold(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Split values into (left, right) parts indexed by ``|x|`` ascending."""
        values = np.asarray(values)
        return values[: self.n_half][::-1], values[self.n_half:]

    def unfold(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`fold`."""
        return np.concatenate([np.asarray(left)[::-1], np.asarray(right)])

    def describe(self) -> dict:
        return {
            "L": self.L,
            "h": self.h,
            "ratio": self.ratio,
            "core_radius": self.core_radius,
            "min_abs_point": self.min_abs,
            "points": int(self.points.size),
            "alpha": self.alpha,
        }


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex values on a :class:`SpatialGrid` at a given time."""

    grid: SpatialGrid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.points.shape:
            raise DomainError("values do not match the grid")
        if not np.all(np.isfinite(vals)):
            raise DomainError("sampled values must be finite")
        if self.time < 0:
            raise DomainError("time must be nonnegative")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points

    def norm(self, p: float = 2.0) -> float:
        return lp_norm(self, p)


def lp_norm(u: SampledFunction, p: float) -> float:
    """Grid-weighted ``L^p`` norm; ``p = inf`` gives the maximum modulus.

    Parameters
    ----------
    u : SampledFunction
    p : float
        Exponent, ``p >= 1`` or ``numpy.inf``.
    """
    if not (p >= 1):
        raise DomainError(f"p must be >= 1, got {p!r}")
    mod = np.abs(u.values)
    if math.isinf(p):
        return float(mod.max())
    return float(np.dot(u.grid.weights, mod**p) ** (1.0 / p))


def integral(u: SampledFunction) -> complex:
    """Plain quadrature of the values, ``sum w_i u_i``."""
    return complex(np.dot(u.grid.weights, u.values))


def weighted_mass(u: SampledFunction, alpha: float) -> complex:
    """Quadrature of ``|x|^(-alpha/2) u``, the heat content conserved by the flow."""
    return complex(np.dot(u.grid.weights * np.abs(u.x) ** (-alpha / 2.0), u.values))
