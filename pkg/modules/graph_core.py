"""Simple labeled graphs, degree sequences and switch primitives.

A switch on (a1, a2, a3, a4) removes the edges a1a2, a3a4 and inserts
a1a3, a2a4. Triangle counts are maintained incrementally: inserting or
deleting an edge uv changes t by |N(u) & N(v)|.
"""
import os
import re
import json
import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from math import comb
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import numpy as np

from .errors import InvalidInput, InvalidSwitch, NonGraphical, NoValidPair

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def _key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class DegreeSequence:
    """Graphical degree sequence, stored non-increasing"""
    degrees: Tuple[int, ...]

    def __post_init__(self):
        degrees = tuple(int(d) for d in self.degrees)
        if any(d < 0 for d in degrees):
            raise InvalidInput(f"Negative degree in {list(degrees)}")
        object.__setattr__(self, 'degrees', tuple(sorted(degrees, reverse=True)))
        if self.M % 2:
            raise NonGraphical(f"Degree sum {self.M} is odd")
        # raises NonGraphical when the reduction gets stuck
        havel_hakimi_edges(self.degrees)

    @property
    def n(self) -> int:
        return len(self.degrees)

    @property
    def M(self) -> int:
        return sum(self.degrees)

    @property
    def M2(self) -> int:
        return sum(d * (d - 1) for d in self.degrees)

    @property
    def mean_degree(self) -> float:
        return self.M / self.n if self.n else 0.0

    @property
    def a_d(self) -> int:
        """Unordered pairs of vertex-disjoint edges in any realization"""
        return comb(self.M // 2, 2) - self.M2 // 2

    @property
    def max_degree(self) -> int:
        return self.degrees[0] if self.degrees else 0

    @property
    def min_degree(self) -> int:
        return self.degrees[-1] if self.degrees else 0

    @property
    def max_triangles(self) -> int:
        return self.M2 // 6

    def label(self) -> str:
        """Compact form, e.g. 3x6 or 4x2,3x4"""
        parts = []
        for d in sorted(set(self.degrees), reverse=True):
            parts.append(f"{d}x{self.degrees.count(d)}")
        return ",".join(parts)

    def to_dict(self) -> Dict:
        return {'n': self.n, 'degrees': list(self.degrees), 'M': self.M, 'M2': self.M2}


_TOKEN = re.compile(r'^(\d+)(?:x(\d+))?$')


def parse_degrees(text: str) -> DegreeSequence:
    """Parse "3x100", "3x4,2x2", "3,3,2,2" or a file containing integers"""
    source = text
    if os.path.isfile(text):
        with open(text) as fh:
            source = fh.read()
    tokens = [tok for tok in re.split(r'[,\s]+', source.strip()) if tok]
    if not tokens:
        raise InvalidInput("Empty degree sequence")
    degrees: List[int] = []
    for tok in tokens:
        match = _TOKEN.match(tok)
        if not match:
            raise InvalidInput(f"Cannot parse degree token {tok!r}")
        value, repeat = match.groups()
        degrees.extend([int(value)] * (int(repeat) if repeat else 1))
    return DegreeSequence(tuple(degrees))


def havel_hakimi_edges(degrees: Iterable[int], rng: Optional[np.random.Generator] = None) -> List[Edge]:
    """Havel-Hakimi realization of vertex i having degree degrees[i].

    The unsatisfied vertex of largest residual (lowest label on ties) is
    joined to the next largest residuals, ties by label; with an rng, equal
    residual candidates are shuffled instead.
    """
    residual = list(degrees)
    n = len(residual)
    edges: List[Edge] = []
    while True:
        v = max(range(n), key=lambda i: (residual[i], -i), default=None)
        if v is None or residual[v] == 0:
            return edges
        need = residual[v]
        residual[v] = 0
        candidates = [i for i in range(n) if i != v and residual[i] > 0]
        if rng is not None:
            noise = rng.permutation(len(candidates))
            order = sorted(range(len(candidates)), key=lambda k: (-residual[candidates[k]], noise[k]))
            candidates = [candidates[k] for k in order]
        else:
            candidates.sort(key=lambda i: (-residual[i], i))
        if len(candidates) < need:
            raise NonGraphical(f"Havel-Hakimi stuck at vertex {v} needing {need} more neighbours")
        for u in candidates[:need]:
            residual[u] -= 1
            edges.append(_key(u, v))


class Graph:
    """Mutable simple graph on vertices 0..n-1 with a cached triangle count"""

    def __init__(self, n: int):
        self.n = n
        self._adj: List[Set[int]] = [set() for _ in range(n)]
        self._edges: List[Edge] = []
        self._edge_index: Dict[Edge, int] = {}
        self.t = 0
        self._pairs: Optional[int] = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Edge]) -> 'Graph':
        g = cls(n)
        for u, v in edges:
            if u == v or not (0 <= u < n and 0 <= v < n):
                raise InvalidInput(f"Invalid edge ({u}, {v}) for n={n}")
            if g.has_edge(u, v):
                raise InvalidInput(f"Duplicate edge ({u}, {v})")
            g._add_edge(u, v)
        return g

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def neighbors(self, v: int) -> Set[int]:
        """Neighbour set of v (do not mutate)"""
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> List[int]:
        return [len(a) for a in self._adj]

    @property
    def m(self) -> int:
        return len(self._edges)

    def edges(self) -> List[Edge]:
        return list(self._edges)

    def edge_at(self, index: int) -> Edge:
        return self._edges[index]

    def edge_set(self) -> FrozenSet[Edge]:
        return frozenset(self._edges)

    def edge_key(self) -> Tuple[Edge, ...]:
        return tuple(sorted(self._edges))

    def min_degree(self) -> int:
        return min(self.degrees()) if self.n else 0

    def nonincident_pair_count(self) -> int:
        if self._pairs is None:
            self._pairs = comb(self.m, 2) - sum(comb(len(a), 2) for a in self._adj)
        return self._pairs

    def copy(self) -> 'Graph':
        g = Graph(self.n)
        g._adj = [set(a) for a in self._adj]
        g._edges = list(self._edges)
        g._edge_index = dict(self._edge_index)
        g.t = self.t
        g._pairs = self._pairs
        return g

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edge_set() == other.edge_set()

    def __hash__(self):
        return hash((self.n, self.edge_key()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m}, t={self.t})"

    def _add_edge(self, u: int, v: int):
        self.t += len(self._adj[u] & self._adj[v])
        self._adj[u].add(v)
        self._adj[v].add(u)
        key = _key(u, v)
        self._edge_index[key] = len(self._edges)
        self._edges.append(key)
        self._pairs = None

    def _remove_edge(self, u: int, v: int):
        self._adj[u].discard(v)
        self._adj[v].discard(u)
        self.t -= len(self._adj[u] & self._adj[v])
        key = _key(u, v)
        idx = self._edge_index.pop(key)
        last = self._edges.pop()
        if last != key:
            # swap-remove keeps edge indices dense
            self._edges[idx] = last
            self._edge_index[last] = idx
        self._pairs = None


class EdgeMaskedView:
    """Read-only view of a graph with one edge hidden"""

    def __init__(self, graph: Graph, edge: Edge):
        self.graph = graph
        self.n = graph.n
        self.masked = _key(*edge)

    def has_edge(self, u: int, v: int) -> bool:
        return _key(u, v) != self.masked and self.graph.has_edge(u, v)

    def neighbors(self, v: int) -> Set[int]:
        a, b = self.masked
        if v == a:
            return self.graph.neighbors(v) - {b}
        if v == b:
            return self.graph.neighbors(v) - {a}
        return self.graph.neighbors(v)

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))


class SwitchType(Enum):
    A = 'A'
    B = 'B'
    C = 'C'


@dataclass(frozen=True)
class Switch:
    a1: int
    a2: int
    a3: int
    a4: int

    @property
    def vertices(self) -> Tuple[int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4)

    @property
    def removed(self) -> Tuple[Edge, Edge]:
        return (_key(self.a1, self.a2), _key(self.a3, self.a4))

    @property
    def added(self) -> Tuple[Edge, Edge]:
        return (_key(self.a1, self.a3), _key(self.a2, self.a4))

    @property
    def diagonals(self) -> Tuple[Edge, Edge]:
        return (_key(self.a1, self.a4), _key(self.a2, self.a3))

    def inverse(self) -> 'Switch':
        return Switch(self.a1, self.a3, self.a2, self.a4)

    def relabelings(self) -> List['Switch']:
        """The four labelings describing the same edge exchange"""
        a1, a2, a3, a4 = self.vertices
        return [
            Switch(a1, a2, a3, a4),
            Switch(a2, a1, a4, a3),
            Switch(a3, a4, a1, a2),
            Switch(a4, a3, a2, a1),
        ]

    def canonical(self) -> 'Switch':
        return min(self.relabelings(), key=lambda s: s.vertices)

    def same_exchange(self, other: 'Switch') -> bool:
        return set(self.removed) == set(other.removed) and set(self.added) == set(other.added)

    def validate(self, g) -> None:
        if len(set(self.vertices)) != 4:
            raise InvalidSwitch(f"Switch vertices {self.vertices} are not distinct")
        if not all(0 <= a < g.n for a in self.vertices):
            raise InvalidSwitch(f"Switch vertices {self.vertices} out of range for n={g.n}")
        for u, v in self.removed:
            if not g.has_edge(u, v):
                raise InvalidSwitch(f"Edge {u}-{v} to remove is absent")
        for u, v in self.added:
            if g.has_edge(u, v):
                raise InvalidSwitch(f"Edge {u}-{v} to insert is already present")

    def is_valid(self, g) -> bool:
        try:
            self.validate(g)
        except InvalidSwitch:
            return False
        return True

    def to_dict(self) -> Dict:
        return {
            'vertices': list(self.vertices),
            'removed': [list(e) for e in self.removed],
            'added': [list(e) for e in self.added],
        }


@dataclass(frozen=True)
class TriSwitch:
    switch: Switch
    delta_t: int

    def to_dict(self) -> Dict:
        data = self.switch.to_dict()
        data['delta_t'] = self.delta_t
        return data


def from_degree_sequence(d: DegreeSequence, seed: Optional[int] = None) -> Graph:
    """Realize d with Havel-Hakimi; seeded runs shuffle equal-degree candidates"""
    rng = np.random.default_rng(seed) if seed is not None else None
    edges = havel_hakimi_edges(d.degrees, rng)
    g = Graph.from_edges(d.n, edges)
    logger.debug(f"Realized {d.label()} with {g.m} edges and {g.t} triangles")
    return g


def count_triangles(g) -> int:
    total = 0
    for u in range(g.n):
        for v in g.neighbors(u):
            if u < v:
                total += len(g.neighbors(u) & g.neighbors(v))
    return total // 3


def triangle_set(g) -> FrozenSet[Tuple[int, int, int]]:
    found = set()
    for u in range(g.n):
        for v in g.neighbors(u):
            if u < v:
                for w in g.neighbors(u) & g.neighbors(v):
                    found.add(tuple(sorted((u, v, w))))
    return frozenset(found)


def count_nonincident_pairs(g) -> int:
    return sum(1 for e, f in combinations(g.edges(), 2) if not set(e) & set(f))


def _external_common(g, u: int, v: int, inside: Tuple[int, ...]) -> int:
    return len((g.neighbors(u) & g.neighbors(v)).difference(inside))


def triangle_delta(g, s: Switch) -> int:
    """t(H) - t(G) for H = G after s, without mutating g.

    Edges between the switch vertices and the rest of the graph are
    unchanged, so only pairs inside the switch are tracked while the
    four edge operations are replayed in order.
    """
    s.validate(g)
    inside = s.vertices
    present = {_key(x, y) for x, y in combinations(inside, 2) if g.has_edge(x, y)}
    delta = 0
    ops = [(False, e) for e in s.removed] + [(True, e) for e in s.added]
    for insert, (u, v) in ops:
        common = _external_common(g, u, v, inside)
        for w in inside:
            if w not in (u, v) and _key(u, w) in present and _key(v, w) in present:
                common += 1
        if insert:
            delta += common
            present.add((u, v))
        else:
            present.discard((u, v))
            delta -= common
    return delta


def apply_switch(g: Graph, s: Switch) -> int:
    """Apply s in place and return the change in triangle count"""
    s.validate(g)
    before = g.t
    pairs = g._pairs
    for u, v in s.removed:
        g._remove_edge(u, v)
    for u, v in s.added:
        g._add_edge(u, v)
    g._pairs = pairs
    return g.t - before


def is_tri_switch(g, s: Switch) -> bool:
    """True iff some removed or inserted edge has a common neighbour outside the switch"""
    s.validate(g)
    inside = s.vertices
    return any(_external_common(g, u, v, inside) for u, v in s.removed + s.added)


def classify_switch(g, s: Switch) -> SwitchType:
    s.validate(g)
    present = sum(1 for u, v in s.diagonals if g.has_edge(u, v))
    return {0: SwitchType.A, 1: SwitchType.C, 2: SwitchType.B}[present]


def random_nonincident_edge_pair(g: Graph, rng: np.random.Generator) -> Tuple[Edge, Edge]:
    """Uniform unordered pair of vertex-disjoint edges, by rejection"""
    if g.nonincident_pair_count() <= 0:
        raise NoValidPair(f"No pair of vertex-disjoint edges among {g.m} edges")
    m = g.m
    while True:
        i = int(rng.integers(m))
        j = int(rng.integers(m - 1))
        if j >= i:
            j += 1
        e, f = g.edge_at(i), g.edge_at(j)
        if e[0] not in f and e[1] not in f:
            return e, f


def write_graph(g: Graph, path: str) -> None:
    header = {'n': g.n, 'degrees': g.degrees(), 't': g.t}
    with open(path, 'w') as fh:
        fh.write(f"# {json.dumps(header)}\n")
        for u, v in sorted(g.edges()):
            fh.write(f"{u} {v}\n")
    logger.info(f"Wrote graph with {g.m} edges to {path}")


def read_graph(path: str) -> Graph:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise InvalidInput(f"Cannot read graph file {path}: {str(e)}")
    if not lines or not lines[0].startswith('#'):
        raise InvalidInput(f"{path}: missing JSON header line")
    try:
        header = json.loads(lines[0][1:])
        n = int(header['n'])
        edges = []
        for line in lines[1:]:
            if line.strip():
                u, v = line.split()
                edges.append((int(u), int(v)))
    except (ValueError, KeyError, TypeError) as e:
        raise InvalidInput(f"{path}: malformed graph file: {str(e)}")
    g = Graph.from_edges(n, edges)
    if 'degrees' in header and list(header['degrees']) != g.degrees():
        raise InvalidInput(f"{path}: header degrees do not match the edge list")
    if 't' in header and int(header['t']) != g.t:
        raise InvalidInput(f"{path}: header t={header['t']} but edges give t={g.t}")
    return g
