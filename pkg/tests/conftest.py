import pytest

CRITERIA = {
    1: "expanded vs compact series connection",
    2: "frequency-domain interconnection oracle",
    3: "controller realizations vs rational transfer functions",
    4: "loop-closure algebra",
    5: "boost + filter + Type 3 pipeline",
    6: "buck multiloop pipeline",
    7: "boost-buck cascade load step",
    8: "simulation exactness",
    9: "buck linearization check",
    10: "CLI determinism and round-trip",
}
_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion number k")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        k = marker.args[0]
        _outcomes.setdefault(k, []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k, title in CRITERIA.items():
        results = _outcomes.get(k)
        if results is None:
            verdict = "NOT RUN"
        else:
            verdict = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {k:2d} [{verdict}] {title}")
