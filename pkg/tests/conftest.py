import pytest

from wsd_ensemble.corpus import corpus_from_records

_criteria: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported at session end")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if _criteria.get(name) != "FAIL":
            _criteria[name] = status


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split()[0])):
        terminalreporter.write_line(f"[{_criteria[name]}] criterion {name}")


@pytest.fixture
def two_instance_corpus():
    """Sense A sees only ``x`` left of the target, sense B only ``y``."""
    return corpus_from_records([
        ("i1", "A", ["x", "line"], 1),
        ("i2", "B", ["y", "line"], 1),
    ], target_word="line")
