"""Shared fixtures, plus a reporter that prints one line per acceptance
criterion at the end of the run."""

import pytest

_ACCEPTANCE_LINES = []


class AcceptanceRecorder:
    """Collects criterion outcomes; check() records the line, then asserts."""

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        status = "PASS" if ok else "FAIL"
        line = f"ACCEPTANCE: {name} ... {status}"
        if detail:
            line += f"   ({detail})"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, f"acceptance criterion failed: {name} {detail}"


@pytest.fixture
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
