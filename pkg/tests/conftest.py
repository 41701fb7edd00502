"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

import pytest

_results: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    report = outcome.get_result()
    if marker is None or not (report.when == "call" or report.failed):
        return
    n, title = marker.args
    status = "PASS" if report.passed else "FAIL"
    # a criterion split over several tests fails if any part fails
    if _results.get(n, ("PASS",))[0] == "PASS":
        _results[n] = (status, title)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        status, title = _results[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {title}")
