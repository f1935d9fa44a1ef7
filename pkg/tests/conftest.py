"""Shared pytest wiring for the acceptance checks.

The `announce` fixture records one `[criterion N] PASS/FAIL` verdict line per
acceptance test; the terminal-summary hook echoes every recorded line after
the run, so the verdicts are visible without -s regardless of capture mode.
"""

import pytest

_verdicts: list[str] = []


@pytest.fixture
def announce():
    def _announce(num: int, ok: bool, detail: str) -> None:
        line = f"[criterion {num}] {'PASS' if ok else 'FAIL'} — {detail}"
        print(line, flush=True)
        _verdicts.append(line)

    return _announce


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _verdicts:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_verdicts):
            terminalreporter.write_line(line)
