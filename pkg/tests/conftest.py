import pytest

from lanepaths.graph import LaneGraph


def make_graph(positions, edges, root=0, extent=(100.0, 100.0)):
    return LaneGraph(positions, edges, root, extent)


def same_geometry(a: LaneGraph, b: LaneGraph) -> bool:
    """Isomorphic with identical node positions (positions must be unique)."""
    pa = {a.position(v): v for v in a.node_ids}
    pb = {b.position(v): v for v in b.node_ids}
    if len(pa) != len(a) or len(pb) != len(b) or set(pa) != set(pb):
        return False
    ea = {(a.position(s), a.position(t)) for s, t in a.edges}
    eb = {(b.position(s), b.position(t)) for s, t in b.edges}
    return ea == eb and a.position(a.root) == b.position(b.root)


@pytest.fixture
def chain():
    return make_graph({0: (0, 0), 1: (10, 0), 2: (20, 0)}, [(0, 1), (1, 2)])


@pytest.fixture
def diamond():
    return make_graph(
        {0: (50, 100), 1: (30, 60), 2: (70, 60), 3: (50, 30)},
        [(0, 1), (0, 2), (1, 3), (2, 3)],
    )


@pytest.fixture
def split():
    return make_graph(
        {0: (50, 100), 1: (30, 60), 2: (70, 60), 3: (20, 30), 4: (80, 30)},
        [(0, 1), (0, 2), (1, 3), (2, 4)],
    )


# -- acceptance reporting ------------------------------------------------------

import time

ACCEPTANCE_LINES: list[str] = []
SESSION_START = time.perf_counter()


@pytest.fixture
def criterion(request):
    """Call ``criterion(ok, detail)`` once to record a PASS/FAIL line."""
    name = request.node.get_closest_marker("criterion").args[0]

    def record(ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")
    config.addinivalue_line("markers", "run_last: run after every other test")


def pytest_collection_modifyitems(items):
    items.sort(key=lambda item: item.get_closest_marker("run_last") is not None)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
