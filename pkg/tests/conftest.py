import numpy as np
import pytest

from ellipticyb.bases import sample_points
from ellipticyb.core import ModularParams, theta


@pytest.fixture(scope="session")
def params():
    return ModularParams()


@pytest.fixture(scope="session")
def points():
    return sample_points(10, 3)


@pytest.fixture(scope="session")
def test_functions(params):
    t, e = params.tau, params.eta
    return [
        lambda z: np.ones_like(z),
        lambda z: theta(3, z, t / 2),
        lambda z: theta(4, z, t / 2) ** 2,
        lambda z: np.exp(2j * np.pi * z) + np.exp(-2j * np.pi * z),
        lambda z: theta(3, z, e),
    ]


def relerr(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300))


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
