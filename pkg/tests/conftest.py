import pytest

# acceptance tests append "CRITERION ...: PASS/FAIL ..." lines here
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_line():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
