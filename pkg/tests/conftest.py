"""Test-suite wiring: per-criterion result lines for the acceptance module."""

_acceptance_reports = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _acceptance_reports[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_reports:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_reports):
        outcome = _acceptance_reports[name].upper()
        terminalreporter.write_line(f"{name}: {outcome}")
