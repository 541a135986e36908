import pytest

_GATE_LINES = []


@pytest.fixture(scope="session")
def gate_log():
    """Shared list of one-line verdicts from the gate checks."""
    return _GATE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # re-print the gate verdicts after capture ends so they survive -q runs
    if _GATE_LINES:
        terminalreporter.section("gate checks")
        for line in _GATE_LINES:
            terminalreporter.write_line(line)
