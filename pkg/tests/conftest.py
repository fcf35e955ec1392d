import pytest

from descontrol.fsa import Alphabet, Automaton

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        n, title = mark.args
        _results[(n, item.name)] = (title, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), (title, outcome) in sorted(_results.items()):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {n}: {title} ({name})")


@pytest.fixture
def ab():
    return Alphabet.of(["a"], ["u"])


@pytest.fixture
def g_toy(ab):
    return Automaton.build(ab, ["q0", "q1"], [("q0", "a", "q1"), ("q1", "u", "q0")], "q0", ["q0"])


@pytest.fixture
def k_toy(ab):
    return Automaton.build(ab, ["k0", "k1"], [("k0", "a", "k1"), ("k0", "u", "k0")], "k0", ["k0", "k1"])
