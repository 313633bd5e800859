import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_verdicts = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if call.when == "setup" and call.excinfo is not None:
        _verdicts[mark.kwargs["number"]] = (mark.kwargs["title"], False, "setup error")
    elif call.when == "call":
        detail = dict(item.user_properties).get("detail", "")
        _verdicts[mark.kwargs["number"]] = (mark.kwargs["title"], call.excinfo is None, detail)


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_verdicts):
        title, ok, detail = _verdicts[number]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f": {detail}" if detail else ""))
