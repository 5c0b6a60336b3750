"""Per-criterion summary lines for the acceptance suite."""

import pytest

_CRITERIA: dict[int, tuple] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, title, limit = mark.args
        detail = dict(item.user_properties).get("detail", "")
        _CRITERIA[number] = (title, "skipped" if rep.skipped else rep.passed, rep.duration, limit, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, secs, limit, detail = _CRITERIA[number]
        status = "SKIP" if ok == "skipped" else ("PASS" if ok else "FAIL")
        line = f"criterion {number:2d} {status}  {title}  [{secs:.1f}s of {limit}s]"
        tr.write_line(line + (f"  {detail}" if detail else ""))
