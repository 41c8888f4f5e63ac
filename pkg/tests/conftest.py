from fractions import Fraction

import pytest

from dualframes.banks import load_bank
from dualframes.laurent import EXACT, LaurentPoly


def P(mapping, mode=EXACT):
    return LaurentPoly(mapping, mode)


HALF = Fraction(1, 2)


@pytest.fixture(scope="session")
def haar():
    return load_bank("haar")


@pytest.fixture(scope="session")
def haar_ns():
    return load_bank("haar_nonstationary")


@pytest.fixture(scope="session")
def haar_gens(haar):
    from dualframes.refinable import generator_set
    return generator_set(haar)


# acceptance lines, printed once at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
