import re
from collections import defaultdict

_CRITERIA = defaultdict(list)
_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_\w+(\[(.*)\])?")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        case = m.group(3) or "-"
        if hasattr(report, "wasxfail"):
            outcome = "xfail" if report.outcome == "skipped" else "xpass"
        else:
            outcome = report.outcome
        _CRITERIA[int(m.group(1))].append((case, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        cases = _CRITERIA[num]
        bad = [f"{c} ({o})" for c, o in cases if o != "passed"]
        status = "PASS" if not bad else "FAIL"
        line = f"criterion {num:2d}: {status}  [{len(cases) - len(bad)}/{len(cases)} cases]"
        if bad:
            line += "  failing: " + ", ".join(bad)
        tr.write_line(line)
