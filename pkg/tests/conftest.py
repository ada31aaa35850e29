import pytest

# acceptance tests record one PASS/FAIL line each; printed after the run so
# they survive pytest's output capture
_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    def record(line: str) -> None:
        _ACCEPTANCE_LINES.append(line)
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
