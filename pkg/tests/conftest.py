from functools import lru_cache

import pytest

from haarbvp.haar import build_system


@lru_cache(maxsize=None)
def cached_system(J):
    return build_system(J)


@pytest.fixture
def system():
    return cached_system


ACCEPTANCE_LINES = []


def record(criterion, passed, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
