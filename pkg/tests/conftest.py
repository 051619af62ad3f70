"""Prints the acceptance summary after the run, one line per criterion."""
import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.LINES:
        terminalreporter.write_line(line)
    for crit in sorted({c for c, _, _ in mod.RECORDS}):
        rows = [ok for c, _, ok in mod.RECORDS if c == crit]
        status = "PASS" if all(rows) else "FAIL"
        terminalreporter.write_line(
            f"{status} criterion {crit}: {sum(rows)}/{len(rows)} checks passed ({mod.CRITERIA[crit]})")
