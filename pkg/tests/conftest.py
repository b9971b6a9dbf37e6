import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record a one-line PASS/FAIL verdict for an acceptance criterion."""

    def _report(criterion: str, ok: bool, detail: str):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
        print(_ACCEPTANCE_LINES[-1])
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
