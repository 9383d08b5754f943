import pytest

# Collect the one-line CRITERION reports printed by test_acceptance.py and
# replay them after the run, so they are visible without -s.
_criterion_lines = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    out = yield
    rep = out.get_result()
    if rep.when == "call":
        for ln in (rep.capstdout or "").splitlines():
            if ln.startswith("CRITERION"):
                _criterion_lines.append(ln)


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for ln in _criterion_lines:
            terminalreporter.write_line(ln)
