import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bridging_heat.exceptions import DomainError
from bridging_heat.grid import SampledFunction, SpatialGrid, integral, lp_norm, weighted_mass


@settings(max_examples=30, deadline=None)
@given(
    st.floats(4.0, 40.0),
    st.floats(0.01, 0.1),
    st.floats(0.5, 0.85),
    st.floats(0.0, 0.99),
)
def test_grid_invariants(L, h, ratio, alpha):
    g = SpatialGrid.build(L=L, h=h, ratio=ratio, alpha=alpha)
    assert np.all(g.points != 0)
    assert np.all(np.diff(g.points) > 0)
    assert np.all(g.weights > 0)
    assert g.min_abs <= 1e-4 * L
    assert abs(g.weights.sum() - 2 * L) <= 1e-12 * 2 * L
    assert np.array_equal(g.points, -g.points[::-1])


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.5, 0.9])
def test_singular_moment(alpha):
    # int |x|^-alpha exp(-x^2) dx = Gamma((1 - alpha) / 2)
    g = SpatialGrid.build(alpha=alpha)
    u = SampledFunction(g, np.abs(g.points) ** -alpha * np.exp(-g.points**2))
    assert integral(u).real == pytest.approx(math.gamma((1 - alpha) / 2), rel=1e-7)


def test_weighted_mass_matches_moment():
    g = SpatialGrid.build(alpha=0.5)
    u = SampledFunction(g, np.abs(g.points) ** -0.25 * np.exp(-g.points**2))
    assert weighted_mass(u, 0.5).real == pytest.approx(math.gamma(0.25), rel=1e-7)


class TestNorms:
    def test_constant_l1(self):
        g = SpatialGrid.build(L=12.0)
        assert lp_norm(SampledFunction(g, np.ones(g.points.size)), 1) == pytest.approx(24.0, rel=1e-12)

    def test_gaussian_l2(self):
        g = SpatialGrid.build()
        u = SampledFunction(g, np.exp(-g.points**2))
        # the low-order product cells near the origin limit this to about 1e-7
        assert lp_norm(u, 2) == pytest.approx((math.pi / 2) ** 0.25, rel=1e-6)

    def test_sup(self):
        g = SpatialGrid.build()
        u = SampledFunction(g, np.exp(-((g.points - 2) ** 2)))
        assert lp_norm(u, math.inf) == pytest.approx(1.0, abs=g.h**2)

    def test_bad_exponent(self):
        g = SpatialGrid.build()
        with pytest.raises(DomainError):
            lp_norm(SampledFunction(g, np.ones(g.points.size)), 0.5)


class TestStructure:
    def test_fold_roundtrip(self):
        g = SpatialGrid.build(L=5.0)
        v = np.arange(g.points.size, dtype=float)
        left, right = g.fold(v)
        assert np.array_equal(g.unfold(left, right), v)
        assert np.array_equal(g.fold(g.points)[0], -g.half)

    def test_sampled_function_validation(self):
        g = SpatialGrid.build(L=5.0)
        with pytest.raises(DomainError):
            SampledFunction(g, np.ones(3))
        bad = np.ones(g.points.size)
        bad[0] = np.nan
        with pytest.raises(DomainError):
            SampledFunction(g, bad)

    def test_sampled_function_is_immutable(self):
        g = SpatialGrid.build(L=5.0)
        u = SampledFunction(g, np.ones(g.points.size))
        with pytest.raises(ValueError):
            u.values[0] = 2.0

    @pytest.mark.parametrize(
        "kwargs", [{"L": -1}, {"ratio": 1.2}, {"alpha": 1.0}, {"h": 1.0, "L": 2.0}]
    )
    def test_bad_parameters(self, kwargs):
        with pytest.raises(DomainError):
            SpatialGrid.build(**kwargs)
