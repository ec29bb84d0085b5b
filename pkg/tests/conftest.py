"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""
import pytest

_LINES: dict[str, str] = {}


@pytest.fixture
def criterion():
    def record(name: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  criterion {name}" + (f": {detail}" if detail else "")
        _LINES[name] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_LINES, key=lambda s: (int(s.split()[0].rstrip("abc")), s)):
        terminalreporter.write_line(_LINES[name])
