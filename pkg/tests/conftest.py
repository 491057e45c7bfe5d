"""Shared pytest hooks.

The acceptance tests append one "CRITERION n ...: PASS/FAIL" line each;
this hook replays them in the terminal summary so the verdicts stay
visible even with output capture enabled.
"""

criterion_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in criterion_lines:
            terminalreporter.line(line)
