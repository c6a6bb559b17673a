import pytest
from hypothesis import settings

from zoned_compiler.ir import Circuit

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

EXAMPLE_PAIRS = [(0, 1), (2, 3), (5, 6), (0, 5), (1, 6), (3, 6), (4, 6), (0, 1), (2, 4), (3, 5)]
EXAMPLE_TEXT = "qubits 7;\n" + "".join(f"cz {a} {b};\n" for a, b in EXAMPLE_PAIRS)


@pytest.fixture
def example7() -> Circuit:
    return Circuit.from_ops(7, [("cz", p) for p in EXAMPLE_PAIRS])


_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        # a parametrized criterion passes only if every case does
        if _criteria.get(num, (title, "PASS"))[1] != "PASS":
            status = _criteria[num][1]
        _criteria[num] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        title, status = _criteria[num]
        terminalreporter.write_line(f"criterion {num}: {status}  {title}")
