import numpy as np
import pytest

from critmarkets import games

# (criterion number, passed, one-line detail), filled by test_acceptance.py
ACCEPTANCE_RESULTS: list = []


@pytest.fixture
def rng():
    return np.random.default_rng(2026)


@pytest.fixture
def chicken():
    return games.chicken_paper()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_RESULTS):
        tag = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{tag}] criterion {number}: {detail}")
