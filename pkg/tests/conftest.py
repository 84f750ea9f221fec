from itertools import combinations

import networkx as nx
import pytest

from modules.enumeration import enumerate_space
from modules.graph_core import DegreeSequence, Graph


def complete(n: int) -> Graph:
    return Graph.from_edges(n, combinations(range(n), 2))


@pytest.fixture
def k4() -> Graph:
    return complete(4)


@pytest.fixture
def two_k4() -> Graph:
    edges = list(combinations(range(4), 2)) + list(combinations(range(4, 8), 2))
    return Graph.from_edges(8, edges)


@pytest.fixture
def petersen() -> Graph:
    return Graph.from_edges(10, nx.petersen_graph().edges())


@pytest.fixture
def prism() -> Graph:
    """Two triangles 0-1-2 and 3-4-5 joined by rungs i, i+3"""
    return Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (0, 3), (1, 4), (2, 5)])


@pytest.fixture
def k33() -> Graph:
    return Graph.from_edges(6, [(a, b) for a in range(3) for b in range(3, 6)])


@pytest.fixture
def cycle5() -> Graph:
    return Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])


@pytest.fixture(scope='session')
def cubic6():
    return enumerate_space(DegreeSequence((3,) * 6))


@pytest.fixture(scope='session')
def square4():
    return enumerate_space(DegreeSequence((2,) * 4))
