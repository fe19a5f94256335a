import pytest

# (number, title, outcome, detail) for tests marked with @pytest.mark.criterion
CRITERIA = []
_WORD = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        CRITERIA.append((mark.args[0], mark.args[1], _WORD[rep.outcome], detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, outcome, detail in sorted(CRITERIA):
        line = f"criterion {num:2d} {outcome}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
