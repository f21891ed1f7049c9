import numpy as np
import pytest

from phdgp.core import PHSystem
from phdgp.models import synthetic_spec

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def scalar_system(E, H, gradH, z, R=0.0, J=0.0):
    """One-dimensional system with ``m = 0``."""
    return PHSystem(
        n=1, m=0,
        E=lambda x: np.array([[E(x[0])]]),
        J=lambda x: np.array([[J]]),
        R=lambda x: np.array([[R]]),
        z=lambda x: np.array([z(x[0])]),
        B=lambda x: np.zeros((1, 0)),
        H=lambda x: H(x[0]),
        gradH=lambda x: np.array([gradH(x[0])]),
    )


@pytest.fixture
def quadratic_scalar():
    # E = 1, H = x^2/2, z = x, J = 0, R = 1
    return scalar_system(lambda x: 1.0, lambda x: 0.5 * x * x, lambda x: x, lambda x: x, R=1.0)


@pytest.fixture
def quartic_scalar():
    # E = 1 + x^2, H = x^4/4, z = x^3/(1 + x^2), J = 0, R = 1
    return scalar_system(lambda x: 1.0 + x * x, lambda x: 0.25 * x ** 4, lambda x: x ** 3,
                         lambda x: x ** 3 / (1.0 + x * x), R=1.0)


@pytest.fixture(scope="session")
def synthetic():
    return synthetic_spec()
