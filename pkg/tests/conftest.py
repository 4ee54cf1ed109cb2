import pytest


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                rows.append((props["criterion"], outcome, props.get("detail", "")))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, outcome, detail in sorted(rows):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if outcome == 'passed' else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return __import__("numpy").random.default_rng(12345)
