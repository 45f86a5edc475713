import pytest


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" and outcome != "error":
                continue
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" in props:
                rows.append((props["criterion"], outcome, props.get("title", rep.nodeid)))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, outcome, title in sorted(rows):
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"AC{number:>2} {mark}  {title}")


@pytest.fixture
def criterion(record_property):
    def mark(number, title):
        record_property("criterion", number)
        record_property("title", title)

    return mark
