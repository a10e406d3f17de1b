"""Estimator-style wrappers around the flows and the decay fit.

Rows of ``X`` are functions sampled on the fitted grid (``grid_.points``);
complex rows are allowed, which is why the array checks here are local
rather than the stock ones.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dispersive import decay_rate_fit
from .evolve import Propagator
from .exceptions import DomainError
from .grid import GRID_DEFAULTS, SpatialGrid
from .heat_kernel import CONTOUR_DEFAULTS, Contour
from .resolvent import _alpha

__all__ = ["BridgingHeatFlow", "ClassicalHeatFlow", "PowerLawDecay", "check_samples"]


def check_samples(X, n_points: int) -> tuple[np.ndarray, bool]:
    """Return ``X`` as a 2-D complex array with ``n_points`` columns.

    A 1-D input is treated as a single row; the flag says whether to squeeze
    the result back.
    """
    arr = np.asarray(X)
    if arr.dtype.kind not in "biufc":
        raise DomainError("samples must be numeric")
    single = arr.ndim == 1
    arr = np.atleast_2d(arr).astype(complex)
    if arr.ndim != 2 or arr.shape[1] != n_points:
        raise DomainError(f"expected rows of {n_points} grid samples, got shape {np.shape(X)}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("samples must be finite")
    return arr, single


def _positive_time(t) -> float:
    t = float(t)
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"t must be positive, got {t!r}")
    return t


class BridgingHeatFlow(TransformerMixin, BaseEstimator):
    """Bridging heat semigroup at a fixed time as a transformer.

    Parameters
    ----------
    alpha : float
        Singularity parameter in ``[0, 1)``.
    t : float
        Evolution time.
    L, h, ratio : float
        Grid parameters, see :meth:`SpatialGrid.build`.
    contour : {"talbot", "hyperbolic", "vertical"}
    nodes : int
        Starting node count of the contour rule.
    kappa : complex or {"calibrated", "verbatim"}

    Attributes
    ----------
    grid_ : SpatialGrid
    propagator_ : Propagator
    """

    def __init__(self, alpha=0.5, t=0.5, L=GRID_DEFAULTS["L"], h=GRID_DEFAULTS["h"],
                 ratio=GRID_DEFAULTS["ratio"], contour="talbot",
                 nodes=CONTOUR_DEFAULTS["nodes"], kappa="calibrated"):
        self.alpha = alpha
        self.t = t
        self.L = L
        self.h = h
        self.ratio = ratio
        self.contour = contour
        self.nodes = nodes
        self.kappa = kappa

    def fit(self, X=None, y=None):
        """Build the grid and the propagator; ``X`` is ignored."""
        a = _alpha(self.alpha)
        _positive_time(self.t)
        self.grid_ = SpatialGrid.build(L=self.L, h=self.h, ratio=self.ratio, alpha=a.alpha)
        self.propagator_ = Propagator(a, self.grid_, Contour(self.contour, int(self.nodes)),
                                      self.kappa)
        return self

    def transform(self, X):
        """Evolve each row of ``X`` by time ``t``."""
        check_is_fitted(self, "propagator_")
        arr, single = check_samples(X, self.grid_.points.size)
        t = _positive_time(self.t)
        out = np.array([self.propagator_.apply(t, row) for row in arr])
        return out[0] if single else out


class ClassicalHeatFlow(TransformerMixin, BaseEstimator):
    """Free heat flow on the line at a fixed time, by direct quadrature."""

    def __init__(self, t=0.5, L=GRID_DEFAULTS["L"], h=GRID_DEFAULTS["h"],
                 ratio=GRID_DEFAULTS["ratio"]):
        self.t = t
        self.L = L
        self.h = h
        self.ratio = ratio

    def fit(self, X=None, y=None):
        t = _positive_time(self.t)
        self.grid_ = SpatialGrid.build(L=self.L, h=self.h, ratio=self.ratio)
        x = self.grid_.points
        kern = np.exp(-((x[:, None] - x[None, :]) ** 2) / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
        self.kernel_ = kern * self.grid_.weights[None, :]
        return self

    def transform(self, X):
        check_is_fitted(self, "kernel_")
        arr, single = check_samples(X, self.grid_.points.size)
        out = arr @ self.kernel_.T
        return out[0] if single else out


class PowerLawDecay(RegressorMixin, BaseEstimator):
    """Regressor ``y ~ prefactor * t^exponent`` fitted in log-log space.

    Attributes
    ----------
    exponent_, prefactor_, fit_residual_ : float
    fit_ : DecayFit
    """

    def __init__(self, p=math.inf, r=1.0):
        self.p = p
        self.r = r

    def fit(self, X, y):
        t = np.asarray(X, dtype=float).reshape(-1)
        v = np.asarray(y, dtype=float).reshape(-1)
        if t.shape != v.shape:
            raise DomainError("X and y must have the same number of samples")
        self.fit_ = decay_rate_fit(zip(t, v), p=self.p, r=self.r)
        self.exponent_ = self.fit_.exponent
        self.prefactor_ = self.fit_.prefactor
        self.fit_residual_ = self.fit_.fit_residual
        return self

    def predict(self, X):
        check_is_fitted(self, "fit_")
        t = np.asarray(X, dtype=float).reshape(-1)
        if np.any(t <= 0):
            raise DomainError("times must be positive")
        return self.prefactor_ * t**self.exponent_
