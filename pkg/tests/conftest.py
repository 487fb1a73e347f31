from collections import defaultdict

import pytest

from renew.env import VehicleModel

_CRITERIA = {}
_RESULTS = defaultdict(dict)   # n -> {nodeid: [outcome, seconds]}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title, limit_s): acceptance criterion n with runtime limit")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            n, title, limit = m.args
            _CRITERIA[n] = (title, limit)


def pytest_runtest_logreport(report):
    if not hasattr(report, "acceptance"):
        return
    # setup time counts too: shared scenario fixtures are built there
    rec = _RESULTS[report.acceptance].setdefault(report.nodeid, ["passed", 0.0])
    rec[1] += report.duration
    if report.outcome != "passed":
        rec[0] = report.outcome


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("acceptance")
    if m is not None:
        rep.acceptance = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, limit = _CRITERIA[n]
        runs = list(_RESULTS.get(n, {}).values())
        if not runs:
            tr.write_line(f"criterion {n:2d}: NOT RUN  {title}")
            continue
        seconds = sum(r[1] for r in runs)
        ok = all(r[0] == "passed" for r in runs) and seconds < limit
        note = "" if seconds < limit else f" (over {limit:g}s limit)"
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}  "
                      f"[{len(runs)} checks, {seconds:.1f}s / {limit:g}s]{note}")


@pytest.fixture
def vehicle():
    return VehicleModel()


def pytest_sessionfinish(session, exitstatus):
    # a criterion that passes its checks but exceeds its runtime limit still fails the run
    for n, (_, limit) in _CRITERIA.items():
        runs = _RESULTS.get(n, {})
        if runs and sum(r[1] for r in runs.values()) >= limit and session.exitstatus == 0:
            session.exitstatus = 1
