import pytest

import ccwp

_CRITERIA: dict[str, tuple[int, str]] = {}
_OUTCOMES: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _CRITERIA[item.nodeid] = (m.args[0], m.args[1])


def pytest_runtest_logreport(report):
    crit = _CRITERIA.get(report.nodeid)
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _OUTCOMES.setdefault(crit[0], []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    titles = {n: t for n, t in _CRITERIA.values()}
    terminalreporter.section("acceptance criteria")
    for n in sorted(titles):
        results = _OUTCOMES.get(n, [])
        status = "PASS" if results and all(results) else ("NOT RUN" if not results else "FAIL")
        terminalreporter.write_line(f"criterion {n}: {status}  {titles[n]}")


@pytest.fixture(scope="session")
def cfg():
    return ccwp.load_config()


@pytest.fixture(scope="session")
def params(cfg):
    return cfg.params
