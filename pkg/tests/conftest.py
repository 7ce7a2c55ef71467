import pytest

_LINES = []


@pytest.fixture
def criterion(request):
    """Record a one-line pass/fail verdict for an acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}" + (f": {detail}" if detail else "")
        _LINES.append((number, line))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_LINES):
            terminalreporter.write_line(line)
