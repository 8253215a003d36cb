import os
import time

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_ACCEPTANCE: dict[int, str] = {}


class Criterion:
    """Times one acceptance criterion and records a one-line verdict."""

    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.start = time.perf_counter()

    def finish(self, ok: bool, detail: str) -> bool:
        elapsed = time.perf_counter() - self.start
        in_time = elapsed < self.budget
        verdict = "PASS" if ok and in_time else "FAIL"
        timing = f"{elapsed:.1f}s of {self.budget:g}s"
        if not in_time:
            timing += " OVER BUDGET"
        _ACCEPTANCE[self.number] = f"[{verdict}] {self.number:2d}. {self.title}: {detail} ({timing})"
        return ok and in_time


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
