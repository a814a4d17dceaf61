"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_CRITERIA = {}
_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _CRITERIA[item.nodeid] = m.args


def pytest_runtest_logreport(report):
    if report.nodeid not in _CRITERIA:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _OUTCOMES[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    grouped = {}
    for nodeid, (number, title) in _CRITERIA.items():
        grouped.setdefault(number, (title, []))[1].append((nodeid, _OUTCOMES.get(nodeid, "not run")))
    for number in sorted(grouped):
        title, parts = grouped[number]
        outcomes = {o for _, o in parts}
        if outcomes == {"passed"}:
            status = "PASS"
        elif "failed" in outcomes:
            status = "FAIL"
        else:
            status = "/".join(sorted(o.upper() for o in outcomes))
        line = f"criterion {number:>2}: {status}  {title}"
        bad = [nid.split("::")[-1] for nid, o in parts if o != "passed"]
        if bad and len(parts) > 1:
            line += f"  [not passing: {', '.join(bad)}]"
        tr.write_line(line)
