import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=100, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
# wider random search: pytest --hypothesis-profile=stress
settings.register_profile("stress", max_examples=1000, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


PROPERTY_OUTCOMES = {}


def pytest_runtest_logreport(report):
    if "test_properties.py" in report.nodeid and (report.when == "call" or report.outcome != "passed"):
        PROPERTY_OUTCOMES[report.nodeid] = PROPERTY_OUTCOMES.get(report.nodeid, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    lines = list(ACCEPTANCE_LINES)
    if PROPERTY_OUTCOMES:
        good = sum(PROPERTY_OUTCOMES.values())
        ok = good == len(PROPERTY_OUTCOMES)
        line = (f"[{'PASS' if ok else 'FAIL'}] criterion 6: property suites, {good}/{len(PROPERTY_OUTCOMES)} "
                f"passed ({settings.default.max_examples} randomized cases each)")
        at = next((i for i, s in enumerate(lines) if "criterion 7" in s), len(lines))
        lines.insert(at, line)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
