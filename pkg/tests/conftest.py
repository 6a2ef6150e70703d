import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from qht import ensembles

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=2, max_value=6)
s_values = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@pytest.fixture
def gen():
    return ensembles.rng(20240611)


@pytest.fixture
def diag_pair():
    """The commuting qubit pair used throughout the worked examples."""
    return np.diag([0.3, 0.7]), np.diag([0.6, 0.4])


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE, acceptance_line

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(acceptance_line(num, ok, detail))
