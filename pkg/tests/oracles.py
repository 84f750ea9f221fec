"""Brute-force references used to cross-check the library."""
from itertools import combinations
from typing import List, Sequence, Set, Tuple

import numpy as np
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from modules.chains import ChainConfig, ChainKind, run_chain
from modules.graph_core import DegreeSequence, Switch, from_degree_sequence

Edge = Tuple[int, int]

PROPERTY_SETTINGS = settings(
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)


def all_realizations(degrees: Sequence[int]) -> Set[Tuple[Edge, ...]]:
    """Every labeled simple graph with vertex i of degree degrees[i], by edge subsets"""
    n = len(degrees)
    m = sum(degrees) // 2
    found = set()
    for subset in combinations(combinations(range(n), 2), m):
        deg = [0] * n
        for u, v in subset:
            deg[u] += 1
            deg[v] += 1
        if deg == list(degrees):
            found.add(tuple(sorted(subset)))
    return found


def triangles(edges: Sequence[Edge], n: int) -> Set[Tuple[int, int, int]]:
    present = set(edges)
    return {
        (a, b, c) for a, b, c in combinations(range(n), 3)
        if (a, b) in present and (a, c) in present and (b, c) in present
    }


def disjoint_pairs(edges: Sequence[Edge]) -> int:
    return sum(1 for e, f in combinations(edges, 2) if not set(e) & set(f))


def reversible_spectrum(P: np.ndarray, pi: np.ndarray) -> List[float]:
    """Eigenvalues of a reversible chain, descending, via D^1/2 P D^-1/2"""
    root = np.sqrt(pi)
    S = (root[:, None] * P) / root[None, :]
    S = 0.5 * (S + S.T)
    return sorted(np.linalg.eigvalsh(S), reverse=True)


@st.composite
def graphs_with_switch(draw, min_degree: int = 3, max_degree: int = 4, n_range: Tuple[int, int] = (4, 8)):
    """A scrambled regular graph and a valid switch on it"""
    half = draw(st.integers(*n_range))
    d = draw(st.integers(min_degree, max_degree))
    seed = draw(st.integers(0, 2 ** 16))
    g = from_degree_sequence(DegreeSequence((d,) * (2 * half)), seed=seed)
    g = run_chain(g, ChainConfig(seed=seed, steps=draw(st.integers(0, 60))), ChainKind.SWITCH).final_graph
    edges = sorted(g.edges())
    (x1, x2) = edges[draw(st.integers(0, len(edges) - 1))]
    (x3, x4) = edges[draw(st.integers(0, len(edges) - 1))]
    s = Switch(x1, x2, x3, x4) if draw(st.booleans()) else Switch(x1, x2, x4, x3)
    assume(s.is_valid(g))
    return g, s
