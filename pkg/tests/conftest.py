from fractions import Fraction

import pytest
from hypothesis import settings

from robustseq.dists import DiscretePair, GaussianLocationPair

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def two_point_pair():
    # ratios 1/2 and 3/2
    return DiscretePair([0, 1], [Fraction(1, 2), Fraction(1, 2)], [Fraction(1, 4), Fraction(3, 4)])


@pytest.fixture
def gauss_pair():
    return GaussianLocationPair(0.0, 1.0)


ACCEPTANCE_LINES: list = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
