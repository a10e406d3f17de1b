"""Heat evolution of initial data, boundary traces, and the classical flow.

``u(t, x) = int K(t; x, y) phi(y) dy`` is evaluated with the grid weights.
The kernel is assembled once per time on the positive half grid as a
same-side block ``S`` and a cross block ``C``; with ``phi`` split into its
right and left parts (both indexed by ``|x|``),

    u_right = S (w phi_right) + C (w phi_left)
    u_left  = C (w phi_right) + S (w phi_left).
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf, erfc

from .exceptions import ConvergenceError, DomainError, GridWarning, TruncationError
from .grid import SampledFunction, SpatialGrid, integral, lp_norm, weighted_mass
from .heat_kernel import Contour, kernel_blocks
from .resolvent import Alpha, KappaSpec, _alpha

__all__ = [
    "InitialDatum",
    "Propagator",
    "BoundaryTraces",
    "evolve",
    "boundary_traces",
    "classical_heat_evolve",
    "lp_norm",
    "integral",
    "weighted_mass",
    "TAIL_BUDGET",
    "TRACE_WINDOW",
]

TAIL_BUDGET = 1.0e-8
# |u| at the window edge, relative to its maximum, that triggers a warning
EDGE_LEVEL = 1.0e-6
# range of |x| used by the trace extrapolation
TRACE_WINDOW = (1.0e-4, 2.0e-2)
TRACE_SPREAD = 0.1


@dataclass(frozen=True)
class InitialDatum:
    """Initial condition ``phi``.

    Use the constructors :meth:`gaussian`, :meth:`indicator` and
    :meth:`samples`.

    Attributes
    ----------
    kind : {"gaussian", "indicator", "samples"}
    params : tuple
        ``(center, width, momentum)`` for a Gaussian
        ``exp(-((x - center)/width)^2) exp(i momentum x)``, ``(lo, hi)`` for
        an indicator.
    values : ndarray or None
        Grid values for ``kind == "samples"``.
    grid : SpatialGrid or None
        Grid the samples live on.
    """

    kind: str
    params: tuple = ()
    values: np.ndarray | None = field(default=None, repr=False, compare=False)
    grid: SpatialGrid | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.kind == "gaussian":
            if len(self.params) != 3:
                raise DomainError("gaussian datum takes (center, width, momentum)")
            center, width, momentum = (float(p) for p in self.params)
            if not all(math.isfinite(v) for v in (center, width, momentum)) or width <= 0:
                raise DomainError("gaussian datum needs finite parameters and width > 0")
            object.__setattr__(self, "params", (center, width, momentum))
        elif self.kind == "indicator":
            if len(self.params) != 2:
                raise DomainError("indicator datum takes (lo, hi)")
            lo, hi = (float(p) for p in self.params)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise DomainError("indicator datum needs lo < hi")
            object.__setattr__(self, "params", (lo, hi))
        elif self.kind == "samples":
            if self.grid is None or self.values is None:
                raise DomainError("sampled datum needs values and their grid")
            vals = SampledFunction(self.grid, self.values).values
            object.__setattr__(self, "values", vals)
        else:
            raise DomainError(f"unknown datum kind {self.kind!r}")

    @classmethod
    def gaussian(cls, center: float = 0.0, width: float = 1.0, momentum: float = 0.0):
        return cls("gaussian", (center, width, momentum))

    @classmethod
    def indicator(cls, lo: float, hi: float):
        return cls("indicator", (lo, hi))

    @classmethod
    def samples(cls, u: SampledFunction):
        return cls("samples", (), values=u.values, grid=u.grid)

    def sample(self, grid: SpatialGrid) -> SampledFunction:
        """Values on ``grid`` at time 0."""
        x = grid.points
        if self.kind == "gaussian":
            c, w, p = self.params
            vals = np.exp(-(((x - c) / w) ** 2)) * np.exp(1j * p * x)
        elif self.kind == "indicator":
            lo, hi = self.params
            vals = ((x >= lo) & (x <= hi)).astype(complex)
        else:
            if grid is not self.grid and not np.array_equal(grid.points, self.grid.points):
                raise DomainError("sampled datum lives on a different grid")
            vals = self.values
        return SampledFunction(grid, vals, 0.0)

    def tail_fraction(self, L: float) -> float:
        """``L^2`` norm outside ``[-L, L]`` relative to the full ``L^2`` norm."""
        if self.kind == "gaussian":
            c, w, _ = self.params
            r2 = math.sqrt(2.0) / w
            frac = 0.5 * (erfc(r2 * (L - c)) + erfc(r2 * (L + c)))
            return math.sqrt(max(frac, 0.0))
        if self.kind == "indicator":
            lo, hi = self.params
            inside = max(0.0, min(hi, L) - max(lo, -L))
            return math.sqrt(max(0.0, 1.0 - inside / (hi - lo)))
        return 0.0

    def describe(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


def _check_tail(datum: InitialDatum, grid: SpatialGrid) -> None:
    frac = datum.tail_fraction(grid.L)
    if frac > TAIL_BUDGET:
        raise TruncationError(
            f"datum has relative L2 mass {frac:.2e} outside [-{grid.L}, {grid.L}]"
        )


def _check_edge(values: np.ndarray, stage: str) -> None:
    mod = np.abs(values)
    peak = mod.max()
    if peak > 0 and max(mod[0], mod[-1]) > EDGE_LEVEL * peak:
        warnings.warn(
            f"{stage}: solution is not small at the window edge; enlarge L",
            GridWarning,
            stacklevel=3,
        )


class Propagator:
    """Bridging heat semigroup on a fixed grid, with kernels cached per time.

    Parameters
    ----------
    a : Alpha or float
    grid : SpatialGrid
    contour : Contour, optional
    kappa : complex or {"calibrated", "verbatim"}
    """

    def __init__(self, a, grid: SpatialGrid, contour: Contour | None = None,
                 kappa: KappaSpec = "calibrated") -> None:
        self.a = _alpha(a)
        self.grid = grid
        self.contour = contour or Contour()
        self.kappa = kappa
        self._cache: dict[float, tuple] = {}
        self._lock = threading.Lock()
        self.diagnostics: dict[float, dict] = {}

    def blocks(self, t: float):
        """Same-side and cross kernel blocks at time ``t``."""
        t = float(t)
        with self._lock:
            hit = self._cache.get(t)
        if hit is not None:
            return hit
        same, cross, info = kernel_blocks(self.a, t, self.grid.half, self.contour, self.kappa)
        with self._lock:
            self._cache[t] = (same, cross)
            self.diagnostics[t] = info
        return same, cross

    def apply(self, t: float, values: np.ndarray) -> np.ndarray:
        """``int K(t; x, y) v(y) dy`` at every grid point."""
        same, cross = self.blocks(t)
        w = self.grid.half_weights
        left, right = self.grid.fold(np.asarray(values, dtype=complex))
        wl, wr = w * left, w * right
        return self.grid.unfold(cross @ wr + same @ wl, same @ wr + cross @ wl)

    def evolve(self, t: float, datum: InitialDatum | SampledFunction) -> SampledFunction:
        if isinstance(datum, SampledFunction):
            phi = datum
        else:
            _check_tail(datum, self.grid)
            phi = datum.sample(self.grid)
        t = float(t)
        if not (math.isfinite(t) and t > 0):
            raise DomainError(f"t must be positive, got {t!r}")
        vals = self.apply(t, phi.values)
        _check_edge(vals, f"evolve(t={t:g})")
        return SampledFunction(self.grid, vals, phi.time + t)


def evolve(
    a,
    t: float,
    datum: InitialDatum,
    grid: SpatialGrid | None = None,
    contour: Contour | None = None,
    kappa: KappaSpec = "calibrated",
) -> SampledFunction:
    """Solve the bridging heat problem with initial datum ``phi`` up to time ``t``.

    Parameters
    ----------
    a : Alpha or float
    t : float
        Positive time.
    datum : InitialDatum
    grid : SpatialGrid, optional
        Defaults to the standard graded grid built for ``alpha``.
    contour : Contour, optional
    kappa : complex or {"calibrated", "verbatim"}

    Returns
    -------
    SampledFunction

    Raises
    ------
    TruncationError
        If the datum carries more than ``1e-8`` of its ``L^2`` norm
        outside the window.
    """
    a = _alpha(a)
    grid = grid or SpatialGrid.build(alpha=a.alpha)
    if grid.alpha != a.alpha:
        raise DomainError("grid weights were built for a different alpha")
    return Propagator(a, grid, contour, kappa).evolve(t, datum)


@dataclass(frozen=True)
class BoundaryTraces:
    """Traces at the origin with extrapolation uncertainties.

    ``u0 = lim |x|^(alpha/2) u`` and
    ``u1 = lim |x|^-(1 + alpha/2) (u - u0 |x|^(-alpha/2))`` on each side.
    """

    u0_minus: complex
    u0_plus: complex
    u1_minus: complex
    u1_plus: complex
    spread: tuple = (0.0, 0.0, 0.0, 0.0)

    def as_tuple(self) -> tuple:
        return (self.u0_minus, self.u0_plus, self.u1_minus, self.u1_plus)

    def bridging_residuals(self) -> tuple[float, float]:
        """``|u0- - u0+|`` and ``|u1- + u1+|``."""
        return abs(self.u0_minus - self.u0_plus), abs(self.u1_minus + self.u1_plus)


def _richardson(x: np.ndarray, f: np.ndarray, exponents: tuple) -> tuple[complex, float]:
    """Limit of ``f`` at 0 assuming ``f = c + sum_k a_k x^e_k``.

    Each triple of points ``(x_j, x_{j+s}, x_{j+2s})`` eliminates two
    correction terms; the estimate is the median over triples and the
    spread is the largest deviation from it.
    """
    n = x.size
    step = max(1, n // 6)
    estimates = []
    for j in range(0, n - 2 * step):
        idx = [j, j + step, j + 2 * step]
        m = np.column_stack([np.ones(3)] + [x[idx] ** e for e in exponents])
        try:
            sol = np.linalg.solve(m, f[idx])
        except np.linalg.LinAlgError:
            continue
        estimates.append(sol[0])
    if not estimates:
        raise ConvergenceError("not enough graded points for the trace extrapolation")
    est = np.array(estimates)
    centre = np.median(est.real) + 1j * np.median(est.imag)
    return complex(centre), float(np.max(np.abs(est - centre)))


def boundary_traces(u: SampledFunction, a, window: tuple = TRACE_WINDOW,
                    max_spread: float = TRACE_SPREAD) -> BoundaryTraces:
    """Extrapolate the traces of ``u`` at the origin from both sides.

    ``u0`` is the limit of ``|x|^(alpha/2) u``, whose corrections go like
    ``|x|^(1+alpha)`` and ``|x|^2``; ``u1`` is the limit of the remainder
    quotient, whose corrections go like ``|x|^(1-alpha)`` and ``|x|^2``.

    Parameters
    ----------
    u : SampledFunction
    a : Alpha or float
    window : (float, float)
        Range of ``|x|`` the extrapolation uses.
    max_spread : float
        Largest tolerated spread relative to the value.

    Raises
    ------
    ConvergenceError
        If the spread of any trace exceeds ``max_spread`` of its value
        (values below ``1e-12 max|u|`` are compared absolutely).
    """
    a = _alpha(a)
    grid = u.grid
    r = grid.half
    sel = (r >= window[0]) & (r <= window[1])
    if np.count_nonzero(sel) < 6:
        raise ConvergenceError("grid has too few points in the trace window")
    x = r[sel]
    half_a = a.alpha / 2.0
    floor = 1e-12 * float(np.max(np.abs(u.values)) or 1.0)
    out, spreads = [], []
    for side in grid.fold(u.values):
        v = side[sel]
        u0, s0 = _richardson(x, v * x**half_a, (1.0 + a.alpha, 2.0))
        rem = (v - u0 * x ** (-half_a)) / x ** (1.0 + half_a)
        exps = (1.0 - a.alpha, 2.0) if a.alpha < 1.0 - 1e-9 else (2.0, 3.0)
        u1, s1 = _richardson(x, rem, exps)
        out.append((u0, u1))
        spreads.append((s0, s1))
    (u0m, u1m), (u0p, u1p) = out
    traces = BoundaryTraces(u0m, u0p, u1m, u1p,
                            (spreads[0][0], spreads[1][0], spreads[0][1], spreads[1][1]))
    for val, sp in zip(traces.as_tuple(), traces.spread):
        if sp > max_spread * max(abs(val), floor):
            raise ConvergenceError(
                f"trace extrapolation spread {sp:.2e} exceeds {max_spread:.0%} of {abs(val):.2e}"
            )
    return traces


def classical_heat_evolve(t: float, datum: InitialDatum, grid: SpatialGrid) -> SampledFunction:
    """Free heat flow on the line, in closed form where available.

    Gaussians and indicators are propagated exactly; sampled data are
    convolved with the Gaussian kernel using the grid weights.
    """
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"t must be positive, got {t!r}")
    x = grid.points
    if datum.kind == "gaussian":
        c, w, p = datum.params
        spread = w * w + 4.0 * t
        shifted = c + 0.5j * p * w * w
        amp = np.exp(1j * p * c - 0.25 * p * p * w * w) / math.sqrt(1.0 + 4.0 * t / (w * w))
        vals = amp * np.exp(-((x - shifted) ** 2) / spread)
    elif datum.kind == "indicator":
        lo, hi = datum.params
        s = math.sqrt(4.0 * t)
        vals = 0.5 * (erf((x - lo) / s) - erf((x - hi) / s)) + 0j
    else:
        phi = datum.sample(grid).values
        kern = np.exp(-((x[:, None] - x[None, :]) ** 2) / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
        vals = kern @ (grid.weights * phi)
    return SampledFunction(grid, vals, t)
