from __future__ import annotations

import numpy as np
import pytest

from qent.algebra import kronecker, linear_a, quiver_from_spec
from qent.scalars import FieldSpec

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def a2():
    return linear_a(2)


@pytest.fixture(scope="session")
def a3():
    return linear_a(3)


@pytest.fixture(scope="session")
def kron():
    return kronecker()


@pytest.fixture(scope="session")
def a2_rational():
    return linear_a(2, FieldSpec.rational())


@pytest.fixture(scope="session")
def two_points():
    return quiver_from_spec(["1", "2"], [])


@pytest.fixture(scope="session")
def algebras(a2, a3, kron):
    return {"A2": a2, "A3": a3, "Kronecker": kron}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
