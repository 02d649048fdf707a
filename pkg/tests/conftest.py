import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

import acceptance_log  # noqa: E402


@pytest.fixture(scope="session")
def key35():
    from threshold_mldsa.threshold import dealer_keygen
    from threshold_mldsa.xof import XofRng
    return dealer_keygen(3, 5, XofRng(35))


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_log.LINES, key=lambda l: int(l.split()[2])):
            terminalreporter.write_line(line)
