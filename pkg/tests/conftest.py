import pytest

_results: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    number, title = mark.args
    outcome = "FAIL" if call.excinfo is not None else "PASS"
    prev = _results.get(number)
    if prev is None or prev[1] == "PASS":
        _results[number] = (title, outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        title, outcome = _results[number]
        terminalreporter.write_line(f"[{outcome}] {number:2d}. {title}")
