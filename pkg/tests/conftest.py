"""Shared fixtures and the acceptance checklist reporter.

Acceptance tests register one verdict line each via the ``checklist``
fixture; the lines are echoed in the terminal summary so a full run ends
with a compact pass/fail table regardless of capture settings.
"""
import pytest

_VERDICTS: list[str] = []


@pytest.fixture
def checklist():
    """Callable: checklist(name, ok, detail) records a verdict line and
    returns ok so the caller can assert on it."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        verdict = "PASS" if ok else "FAIL"
        line = f"{name}: {verdict}" + (f"  ({detail})" if detail else "")
        _VERDICTS.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance checklist")
    for line in _VERDICTS:
        terminalreporter.write_line(line)
