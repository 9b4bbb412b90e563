"""Collects acceptance-criterion outcomes and prints one PASS/FAIL line each."""
import pytest

_CRITERIA: dict[int, tuple[str, str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    if report.when == "setup" and report.passed:
        return
    reason = ""
    if report.failed and call.excinfo is not None:
        reason = str(call.excinfo.value).strip().splitlines()[0] if str(call.excinfo.value).strip() else call.excinfo.typename
    status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    _CRITERIA[number] = (status, title, reason)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title, reason = _CRITERIA[number]
        line = f"{status}  criterion {number:>2}: {title}"
        if reason:
            line += f"  [{reason}]"
        terminalreporter.write_line(line)
