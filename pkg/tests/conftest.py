import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hbcache.topology import load_edge_list  # noqa: E402


@pytest.fixture
def path_graph():
    def make(n):
        return load_edge_list("\n".join(f"{i} {i + 1}" for i in range(n - 1)))
    return make


@pytest.fixture
def star_graph():
    def make(leaves):
        return load_edge_list("\n".join(f"0 {i}" for i in range(1, leaves + 1)))
    return make


_criteria: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    if report.failed or (report.when == "call" and report.passed):
        status = "FAIL" if report.failed else "PASS"
        if _criteria.get(number, ("", "PASS"))[1] != "FAIL":
            _criteria[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
