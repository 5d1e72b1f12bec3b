import math

import pytest

from hmtsim.lattice import LatticeSpec, default_sigma

T_REF = 1e-4
F_REF = 2.5e4
TS_REF = 1e-6
SIGMA_REF = T_REF / (math.sqrt(3.0) * F_REF)


@pytest.fixture
def lattice():
    return LatticeSpec(T_REF, F_REF, 20, 40)


@pytest.fixture
def sigma(lattice):
    return default_sigma(lattice)


#: (criterion, passed, detail) lines collected by the acceptance suite
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for name, passed, detail in ACCEPTANCE_LINES:
            terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
