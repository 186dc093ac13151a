import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")
    config._acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    props = dict(item.user_properties)
    status = "PASS" if rep.passed else "FAIL"
    if "branch" in props:
        status += f" ({props.pop('branch')})"
    detail = "; ".join(f"{k}={v}" for k, v in props.items())
    item.config._acceptance[number] = f"criterion {number} [{status}] {title}: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config._acceptance
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
