import pytest

_ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def _record(criterion: str, status: str, detail: str = "") -> None:
    _ACCEPTANCE_RESULTS.append((criterion, status, detail))


@pytest.fixture
def acceptance_log():
    """Collector printing one pass/fail line per criterion at session end."""
    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, status, detail in _ACCEPTANCE_RESULTS:
        line = f"{status:>4}  {criterion}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
