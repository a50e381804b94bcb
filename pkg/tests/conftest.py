import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from commtrack.detection import make_layer  # noqa: E402
from commtrack.temporal import from_edge_lists  # noqa: E402


def layers_from_sets(*per_t):
    """Layers from plain node-id sets, one positional argument per timestamp."""
    return [make_layer(t, groups, sort=False) for t, groups in enumerate(per_t, start=1)]


def clique_edges(nodes):
    nodes = sorted(nodes)
    return [(a, b) for i, a in enumerate(nodes) for b in nodes[i + 1:]]


@pytest.fixture
def two_triangles():
    return from_edge_lists([[(1, 2), (2, 3), (1, 3), (3, 4), (4, 5), (5, 6), (4, 6)],
                            [(1, 2)]])


# ---------------------------------------------------------------- acceptance report

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0] if marker.args else item.name
    if call.when == "setup" and call.excinfo is not None:
        _ACCEPTANCE[label] = "SKIP" if call.excinfo.errisinstance(pytest.skip.Exception) else "FAIL"
    elif call.when == "call":
        if call.excinfo is None:
            _ACCEPTANCE[label] = "PASS"
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            _ACCEPTANCE[label] = "SKIP"
        else:
            _ACCEPTANCE[label] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{_ACCEPTANCE[label]:4s}  {label}")
