import math
from fractions import Fraction

import pytest
from hypothesis import settings

from probe.distributions import FLOAT_TOLERANCE, audit

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def total_is_one(masses) -> bool:
    if any(isinstance(m, float) for m in masses):
        return abs(math.fsum(float(m) for m in masses) - 1) <= FLOAT_TOLERANCE
    return sum(masses, Fraction(0)) == 1


@pytest.fixture(autouse=True)
def normalization_sweep():
    """Every distribution built during a test must have total mass one."""
    with audit() as log:
        yield log
    bad = [m for m in log if not total_is_one(m)]
    assert not bad, f"{len(bad)} unnormalised distributions, first {bad[0]}"


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, line
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for row in sorted(RESULTS):
            terminalreporter.write_line(line(*row))
