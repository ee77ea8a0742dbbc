def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config._criteria = {}


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_report_teststatus(report, config):
    props = dict(report.user_properties)
    n = props.get("criterion")
    if n is None or report.when != "call":
        return None
    status = "PASS" if report.passed else "FAIL"
    config._criteria[n] = f"criterion {n}: {status} {props.get('detail', '')}".rstrip()
    return None


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not config._criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(config._criteria):
        terminalreporter.write_line(config._criteria[n])
