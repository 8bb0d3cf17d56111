from __future__ import annotations

import pytest
from hypothesis import settings

# property tests draw the same examples on every run
settings.register_profile("fixed", derandomize=True, deadline=None)
settings.load_profile("fixed")

_LINES: list[str] = []


class AcceptanceLog:
    """Collects one verdict line per acceptance criterion."""

    def __call__(self, number: int, passed: bool, title: str, detail: str, seconds: float | None = None) -> str:
        timing = f" [{seconds:.1f} s]" if seconds is not None else ""
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title}. {detail}{timing}"
        _LINES.append(line)
        print(line)
        return line


@pytest.fixture
def verdict() -> AcceptanceLog:
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_LINES, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)
