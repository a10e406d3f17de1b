"""Shared fixtures and the acceptance summary printed after the run."""

import math

import numpy as np
import pytest

from bridging_heat.evolve import InitialDatum, Propagator
from bridging_heat.grid import SpatialGrid

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record_acceptance(number: int, name: str, passed: bool, detail: str) -> None:
    _ACCEPTANCE[number] = (name, bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        name, passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(
            f"{'PASS' if passed else 'FAIL'}  criterion {number:2d}  {name}: {detail}"
        )


@pytest.fixture(scope="session")
def grid05():
    return SpatialGrid.build(alpha=0.5)


@pytest.fixture(scope="session")
def prop05(grid05):
    """Propagator at alpha = 0.5 shared across modules so kernels are built once."""
    return Propagator(0.5, grid05)


@pytest.fixture(scope="session")
def fig2_datum():
    return InitialDatum.gaussian(2.0, 1.0)


def relative_l2(u, v, weights):
    return math.sqrt(np.dot(weights, np.abs(u - v) ** 2) / np.dot(weights, np.abs(v) ** 2))
