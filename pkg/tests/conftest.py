"""Shared pytest plumbing.

The acceptance suite registers one verdict per numbered criterion in
ACCEPTANCE_RESULTS; the terminal-summary hook prints them after the run so
the pass/fail lines survive output capture.
"""

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool]] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        label, passed = ACCEPTANCE_RESULTS[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {label}")
