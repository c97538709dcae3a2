"""Collects acceptance-criterion outcomes and prints one line per criterion."""
import pytest

_OUTCOMES = {}


@pytest.fixture
def detail(request):
    """Callable that attaches a one-line summary to the criterion report."""
    def note(text):
        request.node.user_properties.append(("detail", text))
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = report.failed
    if report.when == "call" or failed:
        prev = _OUTCOMES.get(number)
        notes = [v for k, v in item.user_properties if k == "detail"]
        if failed and report.longrepr is not None:
            notes.append(str(report.longrepr).strip().splitlines()[-1][:160])
        passed = not failed and (prev is None or prev[1])
        _OUTCOMES[number] = (title, passed, "; ".join(notes))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, passed, notes = _OUTCOMES[number]
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}"
        if notes:
            line += f"  [{notes}]"
        terminalreporter.write_line(line)
