import pytest

_CRITERIA: list[str] = []


@pytest.fixture
def report():
    """Record a one-line acceptance verdict, printed in the terminal summary."""

    def _report(number, ok, detail):
        _CRITERIA.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
