"""Collects acceptance-criterion outcomes and prints one line per criterion."""

_results = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    criterion = props.get("criterion")
    if criterion is None:
        return
    if report.when == "call" or report.failed:
        _results[criterion] = (report.passed and report.when == "call", props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(_results, key=lambda c: int(c[1:])):
        ok, detail = _results[criterion]
        terminalreporter.write_line(f"{criterion} {'PASS' if ok else 'FAIL'}  {detail}")
