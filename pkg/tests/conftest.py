import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("kklab", max_examples=60, deadline=None)
settings.load_profile("kklab")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_states(rng, n, lo=0.5, hi=4.0):
    return rng.uniform(lo, hi, size=(n, 2))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
