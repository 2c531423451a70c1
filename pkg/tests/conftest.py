import os
import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pinchlab.dumbbell import build_dumbbell
from pinchlab.geometry import bump_sphere, round_sphere

settings.register_profile("ci", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

BUMP_DELTAS = (0.2, 0.1, 0.05, 0.025)
DUMBBELL_EPS = (1e-1, 1e-2, 1e-3, 1e-4)

_ACCEPTANCE_LINES = []


def record_acceptance(line: str):
    _ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def _quiet_numpy():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


@pytest.fixture(scope="session")
def unit_sphere():
    return round_sphere(2, 1.0)


@pytest.fixture(scope="session")
def bumps():
    return {d: bump_sphere(2, d) for d in BUMP_DELTAS}


@pytest.fixture(scope="session")
def dumbbells():
    return {e: build_dumbbell(2, 0, e) for e in DUMBBELL_EPS}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
