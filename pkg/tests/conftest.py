"""Shared pytest hooks: surface the acceptance-criteria summary lines.

The acceptance tests record one PASS/FAIL line per criterion; printing them
from inside a test would be swallowed by capture, so they are replayed in
the terminal summary where they always appear.
"""

CRITERION_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
