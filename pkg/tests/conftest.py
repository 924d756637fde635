import numpy as np
import pytest

from geomlearn.matfun import random_spd


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def spd_pair(rng):
    return random_spd(rng, 4), random_spd(rng, 4)


_ACCEPTANCE = []


@pytest.fixture
def report():
    """Record one acceptance line; lines are printed now and in the terminal summary."""

    def record(number, name, passed, detail):
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'} {name}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
