"""Per-criterion pass/fail report for the acceptance module."""
import pytest

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion a test checks")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, text = mark.args
    entry = _results.setdefault(number, {"text": text, "passed": 0, "failed": 0, "skipped": 0})
    # a failed setup or call counts once; the call phase records passes
    if call.excinfo is not None:
        key = "skipped" if call.excinfo.errisinstance(pytest.skip.Exception) else "failed"
        entry[key] += 1
    elif call.when == "call":
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results):
        r = _results[number]
        if r["failed"]:
            status = "FAIL"
        elif r["passed"] and not r["skipped"]:
            status = "PASS"
        else:
            status = "SKIP"
        counts = f"{r['passed']} passed, {r['failed']} failed"
        tr.write_line(f"criterion {number}: {status}  {r['text']}  ({counts})")
