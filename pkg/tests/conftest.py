import numpy as np
import pytest

from ssts.problems import example1, example2


@pytest.fixture(scope="session")
def ex1_small():
    return {m: example1(m) for m in (2, 4, 8)}


@pytest.fixture(scope="session")
def ex2_small():
    return {m: example2(m) for m in (2, 4, 8)}


@pytest.fixture
def rng():
    return np.random.default_rng(20161)


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one pass/fail line; printed immediately and again in the summary."""

    def record(criterion: str, passed: bool, detail: str = "") -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
