"""Per-criterion pass/fail summary for tests marked ``@pytest.mark.criterion(n)``."""

_CRITERIA = {}
_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


def pytest_collection_modifyitems(session, config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _CRITERIA[item.nodeid] = mark.args[0]


def pytest_runtest_logreport(report):
    n = _CRITERIA.get(report.nodeid)
    if n is None:
        return
    ok = _OUTCOMES.get(n, True)
    if report.failed or (report.when == "call" and report.skipped):
        ok = False
    _OUTCOMES[n] = ok


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _OUTCOMES[n] else 'FAIL'}")
