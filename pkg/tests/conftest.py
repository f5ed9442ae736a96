import pytest

_LINES: list = []


@pytest.fixture
def report():
    """Record one ``criterion N: PASS|FAIL`` line, shown in the terminal summary."""
    def add(number, passed: bool, detail: str = "") -> None:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}"
        if detail:
            line += f"  {detail}"
        _LINES.append(line)
        print(line)
    return add


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES):
            terminalreporter.write_line(line)
