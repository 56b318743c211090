import time
from contextlib import contextmanager

import pytest

ACCEPTANCE_RESULTS: dict[int, str] = {}


@contextmanager
def criterion(number: int, title: str, budget: float):
    """Time a criterion block, record a PASS/FAIL line and enforce its runtime budget."""
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        line = f"criterion {number:2d} FAIL  {title} ({elapsed:.2f}s): {type(exc).__name__}"
        ACCEPTANCE_RESULTS[number] = line
        print(line)
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < budget
    line = (f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title} "
            f"({elapsed:.2f}s of {budget:g}s)")
    ACCEPTANCE_RESULTS[number] = line
    print(line)
    assert ok, line


@pytest.fixture
def acceptance():
    return criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[number])
