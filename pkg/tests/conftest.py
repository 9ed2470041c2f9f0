"""Shared pytest wiring: collect acceptance verdict lines, echo them last."""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance():
    """One verdict line per criterion, echoed in the terminal summary."""
    def report(num, name, passed, elapsed, budget=None, detail=""):
        verdict = "PASS" if passed else "FAIL"
        timing = (f"{elapsed:.2f} s" if budget is None
                  else f"{elapsed:.2f} s of {budget:.0f} s")
        line = f"criterion {num} [{name}]: {verdict} ({timing})"
        if detail:
            line += " " + detail
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line
    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
