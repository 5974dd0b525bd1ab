import re

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)_(\w+)", report.nodeid)
    if m is None:
        return
    if report.when == "call" or report.failed:
        n = int(m.group(1))
        if _CRITERIA.get(n, (None, "passed"))[1] == "passed":
            _CRITERIA[n] = (m.group(2).replace("_", " "), report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        name, outcome = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d} {name}: {'PASS' if outcome == 'passed' else 'FAIL'}")
