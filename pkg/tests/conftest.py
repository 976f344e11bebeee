import pytest

from nltraffic.threshold import default_curve

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def curve():
    return default_curve()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
