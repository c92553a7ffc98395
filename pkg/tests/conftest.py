import pytest
from hypothesis import settings

from stomega.lattice import linear_lattice, symplectic_lattice

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def lat22():
    return symplectic_lattice(2, 2)


@pytest.fixture(scope="session")
def lat23():
    return symplectic_lattice(2, 3)


@pytest.fixture(scope="session")
def lat4():
    return linear_lattice(4, 2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
