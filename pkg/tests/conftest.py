import pytest

_LINES: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record the one-line verdict for an acceptance criterion."""
    def record(number: int, title: str, ok: bool, detail: str) -> None:
        _LINES[number] = f"criterion {number} ({title}): {'PASS' if ok else 'FAIL'}  {detail}"
        print(_LINES[number])
    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_LINES):
            terminalreporter.write_line(_LINES[number])
