"""Print one PASS/FAIL line per acceptance criterion at the end of the run.

Acceptance tests carry ``@pytest.mark.criterion(number, title)`` and may add a
``("detail", text)`` user property with the measured numbers.
"""

import pytest

_criteria: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "call" or report.failed:
        status = "PASS" if report.passed else "FAIL"
        detail = dict(item.user_properties).get("detail", "")
        if report.failed and not detail:
            detail = report.longrepr.reprcrash.message if hasattr(report.longrepr, "reprcrash") else "error"
        _criteria[number] = (title, status, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status, detail = _criteria[number]
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")
