import numpy as np
import pytest

from linefield.geometry import DomainSpec, FourierCurve
from linefield.grid import rasterize


@pytest.fixture(scope="session")
def annulus():
    return DomainSpec(FourierCurve.circle(1.0), 0.4)


@pytest.fixture(scope="session")
def disk():
    return DomainSpec(FourierCurve.circle(1.0), mode="raw")


@pytest.fixture(scope="session")
def annulus_grid(annulus):
    return rasterize(annulus, 1 / 64)


@pytest.fixture(scope="session")
def disk_grid(disk):
    return rasterize(disk, 1 / 64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def record():
    """Log one line per acceptance criterion; returns the verdict so tests can assert it."""
    def rec(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok
    return rec


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
