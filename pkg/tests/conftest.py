import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record and print one PASS/FAIL line per acceptance criterion."""

    def report(number, title, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {title} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
