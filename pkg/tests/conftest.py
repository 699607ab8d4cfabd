from importlib import resources
from pathlib import Path

import pytest

from legoiso import load_rules, load_taxonomy

DATA = Path(str(resources.files("legoiso") / "data"))


@pytest.fixture(scope="session")
def taxonomy():
    return load_taxonomy()


@pytest.fixture(scope="session")
def rules(taxonomy):
    return load_rules(None, taxonomy)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


def pairs(assignments):
    """Assignments as a frozenset of 'Dimension:Function' strings."""
    if assignments is None:
        return None
    return frozenset(str(a) for a in assignments)


_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion covered by the test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call" and not (call.when == "setup" and call.excinfo):
        return
    n, text = marker.args
    ok = call.excinfo is None
    prev = _criteria.get(n, (text, True))
    _criteria[n] = (text, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        text, ok = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {text}")
