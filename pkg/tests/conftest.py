import pytest

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record a one-line verdict for an acceptance criterion and assert it."""

    def record(number, title, ok, detail):
        _CRITERIA[number] = f"AC{number} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        assert ok, _CRITERIA[number]

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
