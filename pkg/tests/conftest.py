"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_RESULTS: dict[int, dict] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, text = mark.args
            item.user_properties.append(("criterion", (number, text)))


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    number, text = props["criterion"]
    entry = _RESULTS.setdefault(number, {"text": text, "ok": True, "measured": []})
    if report.failed or (report.when == "call" and report.skipped):
        entry["ok"] = False
    if report.when == "call":
        entry["measured"] = [f"{k}={v}" for k, v in report.user_properties if k != "criterion"]


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_RESULTS):
        e = _RESULTS[number]
        line = f"{'PASS' if e['ok'] else 'FAIL'}  criterion {number:>2}: {e['text']}"
        if e["measured"]:
            line += "  [" + "; ".join(e["measured"]) + "]"
        tr.write_line(line)
