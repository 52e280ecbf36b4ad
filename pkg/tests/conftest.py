import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from homog_ineq import GroupModel, RadialGrid

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def flat_top(s, lo, hi, sharp=0.25):
    """Smooth window equal to 1 (to ~1e-12) well inside ``[lo, hi]``."""
    return 0.5 * (np.tanh((s - lo) / sharp) - np.tanh((s - hi) / sharp))


def bump_s(s, c=0.0, w=1.0):
    x = (np.asarray(s) - c) / w
    out = np.zeros_like(x)
    m = np.abs(x) < 1
    out[m] = np.exp(1 - 1 / (1 - x[m] ** 2))
    return out


@pytest.fixture(scope="session")
def model3():
    return GroupModel.euclidean(3, 2.0, 8)


@pytest.fixture(scope="session")
def model3_inf():
    return GroupModel.euclidean(3, math.inf, 6)


@pytest.fixture(scope="session")
def model2():
    return GroupModel.euclidean(2, 2.0, 16)


@pytest.fixture(scope="session")
def grid():
    return RadialGrid()


@pytest.fixture(scope="session")
def small_grid():
    return RadialGrid(-10.0, 6.0, 1024)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] #{k:>2} {title}: {detail}")
