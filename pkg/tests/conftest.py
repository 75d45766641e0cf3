import pytest

from aucteq.construct import construct_table1

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def table1():
    return construct_table1(1e-4)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
