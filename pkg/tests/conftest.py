# tests/conftest.py

import os
import sys

import pytest

# корінь проєкту в sys.path, щоб імпортувати src
PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from src.modules.structure.service import Hypergraph  # noqa: E402
from src.modules.vocabulary.presets import preset  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--run-acceptance", action="store_true", default=False,
                     help="run desk-scale acceptance checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-acceptance"):
        return
    skip = pytest.mark.skip(reason="needs --run-acceptance")
    for item in items:
        if "acceptance" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def graph_vocab():
    return preset("graph")


@pytest.fixture
def digraph_vocab():
    return preset("digraph")


@pytest.fixture
def loops_vocab():
    return preset("digraph-loops")


@pytest.fixture
def cnf3_vocab():
    return preset("cnf3")


def graph_from_pairs(pairs, vertices=None):
    return Hypergraph.from_edges(preset("graph"), [("E", p) for p in pairs], vertices=vertices)


@pytest.fixture
def make_graph():
    return graph_from_pairs


@pytest.fixture
def path4():
    """0 - 1 - 2 - 3"""
    return graph_from_pairs([(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def triangle_with_tail():
    """Triangle 0-1-2 with a path 2 - 3 - 4 and an isolated vertex 9."""
    return graph_from_pairs([(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)], vertices=[9])


@pytest.fixture
def theta():
    """Two vertices joined by three internally disjoint paths of length 2: excess 1."""
    return graph_from_pairs([(0, 1), (1, 5), (0, 2), (2, 5), (0, 3), (3, 5)])
