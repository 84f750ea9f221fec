"""Simulate any switch by a short sequence of triangle switches.

For a switch s on a graph G of minimum degree at least 3, simulate_switch
returns a fixed path G = X0, X1, ..., Xk = H (k <= 5) where every step
changes the set of triangles. Cases are tried in order I, II, ..., IXc.
Within a case the relabelings of s are scanned in a fixed order and free
vertex choices are the smallest labels available. Each candidate is
replayed before it is accepted, so an emitted path is always valid.

Notation: D = {a1, a2, a3, a4} and A_i = N(a_i) minus D.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, permutations
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from .config import verify_paths_enabled
from .errors import InternalContradiction, MinDegreeTooSmall, PlantImpossible
from .graph_core import (
    Edge,
    EdgeMaskedView,
    Graph,
    Switch,
    SwitchType,
    TriSwitch,
    apply_switch,
    classify_switch,
    count_triangles,
    is_tri_switch,
    triangle_delta,
)

logger = logging.getLogger(__name__)


class CaseLabel(Enum):
    I = 'I'
    II = 'II'
    III = 'III'
    IV = 'IV'
    V = 'V'
    VI = 'VI'
    VII = 'VII'
    VIIIa = 'VIIIa'
    VIIIb = 'VIIIb'
    IXa = 'IXa'
    IXb = 'IXb'
    IXc = 'IXc'


CASE_LENGTH = {
    CaseLabel.I: 1,
    CaseLabel.II: 2,
    CaseLabel.III: 2,
    CaseLabel.IV: 2,
    CaseLabel.V: 4,
    CaseLabel.VI: 4,
    CaseLabel.VII: 4,
    CaseLabel.VIIIa: 4,
    CaseLabel.VIIIb: 4,
    CaseLabel.IXa: 3,
    CaseLabel.IXb: 4,
    CaseLabel.IXc: 5,
}

MAX_PATH_LENGTH = 5


@dataclass(frozen=True)
class SimulationPath:
    case: CaseLabel
    switch: Switch
    relabeling: Switch
    steps: Tuple[TriSwitch, ...]
    auxiliaries: Dict[str, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> Dict:
        return {
            'case': self.case.value,
            'switch': list(self.switch.vertices),
            'relabeling': list(self.relabeling.vertices),
            'steps': [step.to_dict() for step in self.steps],
            'auxiliaries': dict(self.auxiliaries),
        }


@dataclass(frozen=True)
class PathVerification:
    ok: bool
    failure: Optional[str] = None
    step_index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class _Plan:
    case: CaseLabel
    relabeling: Switch
    switches: List[Switch]
    aux: Dict[str, int]


def _outside(g, x: int, D: Sequence[int]) -> FrozenSet[int]:
    return frozenset(g.neighbors(x).difference(D))


def _core(s: Switch, u: int) -> List[Switch]:
    """Two steps exchanging a1a2, a3a4 through a pivot u in A1 outside A4"""
    a1, a2, a3, a4 = s.vertices
    return [Switch(a1, u, a3, a4), Switch(a1, a2, u, a4)]


def _pivots(g, s: Switch) -> List[int]:
    """Vertices u in A1, not adjacent to a4, lying on a triangle a1 u w outside D"""
    D = s.vertices
    a1, a4 = s.a1, s.a4
    found = []
    for u in sorted(_outside(g, a1, D)):
        if g.has_edge(u, a4):
            continue
        if (g.neighbors(a1) & g.neighbors(u)).difference(D):
            found.append(u)
    return found


def _has_local_structure(g, s: Switch) -> bool:
    """Some diagonal present, a shared outside neighbour, or a usable triangle"""
    if classify_switch(g, s) is not SwitchType.A:
        return True
    D = s.vertices
    A = [_outside(g, x, D) for x in D]
    if any(A[i] & A[j] for i, j in combinations(range(4), 2)):
        return True
    for j, x in enumerate(D):
        for u in A[j] - A[3 - j]:
            if (g.neighbors(x) & g.neighbors(u)).difference(D):
                return True
    return False


def _edge(x: int, y: int) -> Edge:
    return (x, y) if x < y else (y, x)


def _planting(g, sw: Switch, triangle: Tuple[int, int, int]) -> Optional[TriSwitch]:
    """sw as a planting move, if it is valid and creates the given triangle"""
    if not sw.is_valid(g):
        return None
    removed, added = set(sw.removed), set(sw.added)
    sides = [_edge(x, y) for x, y in combinations(triangle, 2)]
    if any(e in removed for e in sides) or not any(e in added for e in sides):
        return None
    if not all(e in added or g.has_edge(*e) for e in sides):
        return None
    # the new triangle alone makes it a triangle switch; other triangles may break
    return TriSwitch(sw, triangle_delta(g, sw))


def _plantings(g, v: int, r: Sequence[int], forced_first: Optional[int] = None) -> Iterator[TriSwitch]:
    """Every planting move for v and r, shortest cycle through r_i v r_j first.

    4-cycles r_i v r_j w come first, then 5-cycles v r_i w1 w2 r_j, then
    paths w1 r_i v r_j w2. Within a kind the order is lexicographic.
    """
    r = tuple(r)
    taken = set(r) | {v}
    if forced_first is None:
        pairs = [(a, b) for a in r for b in r if a != b]
    else:
        pairs = [(forced_first, b) for b in r if b != forced_first]

    def third(a: int, b: int) -> int:
        return next(x for x in r if x not in (a, b))

    for a, b in pairs:
        for w in sorted((g.neighbors(a) & g.neighbors(b)) - {v}):
            planted = _planting(g, Switch(v, third(a, b), w, b), (v, a, w))
            if planted:
                yield planted

    for a, b in pairs:
        for w1 in sorted(g.neighbors(a) - taken):
            for w2 in sorted((g.neighbors(w1) & g.neighbors(b)) - taken):
                planted = _planting(g, Switch(v, third(a, b), w1, w2), (v, a, w1))
                if planted:
                    yield planted

    for a, b in pairs:
        for w1 in sorted(g.neighbors(a) - taken):
            for w2 in sorted(g.neighbors(b) - taken - {w1}):
                planted = _planting(g, Switch(a, w1, b, w2), (v, a, b))
                if planted:
                    yield planted


def plant_triangle(g, v: int, r: Sequence[int], forced_first: Optional[int] = None) -> TriSwitch:
    """Triangle-creating switch putting a new triangle on v and a member of r.

    r holds three neighbours of v, none on a triangle with v. The shortest
    cycle through a path r_i v r_j decides the move: a 4-cycle, a 5-cycle,
    or (longer or none) a path w1 r_i v r_j w2. The move may break other
    triangles, so delta_t is not always positive. With forced_first the
    new triangle contains that vertex; PlantImpossible means no move does.
    """
    planted = next(_plantings(g, v, r, forced_first), None)
    if planted is None:
        raise PlantImpossible(f"No triangle can be planted at {v} with {list(r)} (first={forced_first})")
    return planted


def _direct_plans(g: Graph, s: Switch) -> Iterator[_Plan]:
    D = s.vertices
    kind = classify_switch(g, s)
    relabelings = s.relabelings()

    if is_tri_switch(g, s):
        yield _Plan(CaseLabel.I, s, [s], {})
        return

    if kind in (SwitchType.A, SwitchType.B):
        case = CaseLabel.II if kind is SwitchType.A else CaseLabel.III
        for rel in relabelings:
            a1, a2, a3, a4 = rel.vertices
            shared = _outside(g, a1, D) & _outside(g, a4, D)
            if not shared:
                continue
            aux = {'v': min(shared)}
            if case is CaseLabel.II:
                steps = [Switch(a1, a2, a4, a3), Switch(a1, a4, a3, a2)]
            else:
                steps = [Switch(a1, a4, a3, a2), Switch(a1, a2, a4, a3)]
            yield _Plan(case, rel, steps, aux)

    # IV, first subcase: diagonal a2a3 present, pivot from A1 minus A4
    for rel in relabelings:
        a1, a2, a3, a4 = rel.vertices
        if not g.has_edge(a2, a3):
            continue
        for u in sorted(_outside(g, a1, D) - _outside(g, a4, D)):
            yield _Plan(CaseLabel.IV, rel, _core(rel, u), {'u': u})

    # IV, second subcase: triangle a1 u w outside D
    for rel in relabelings:
        a1, a4 = rel.a1, rel.a4
        for u in sorted(_outside(g, a1, D) - _outside(g, a4, D)):
            common = (g.neighbors(a1) & g.neighbors(u)).difference(D)
            if common:
                yield _Plan(CaseLabel.IV, rel, _core(rel, u), {'u': u, 'w': min(common)})

    if kind is not SwitchType.C:
        return
    for rel in relabelings:
        a1, a2, a3, a4 = rel.vertices
        if not g.has_edge(a1, a4):
            continue
        shared = _outside(g, a2, D)
        if shared != _outside(g, a3, D):
            continue
        inner = [(u, v) for u, v in combinations(sorted(shared), 2) if g.has_edge(u, v)]
        if inner:
            u, v = inner[0]
            steps = [
                Switch(a1, a4, u, v),
                Switch(a1, a2, a4, a3),
                Switch(a1, a4, a3, a2),
                Switch(a1, u, a4, v),
            ]
            yield _Plan(CaseLabel.V, rel, steps, {'u': u, 'v': v})
        elif len(shared) >= 2:
            u, v = sorted(shared)[:2]
            rest = _outside(g, v, D)
            if not rest:
                continue
            w = min(rest)
            steps = [
                Switch(u, a3, v, w),
                Switch(a2, u, a4, a3),
                Switch(a1, a2, a3, u),
                Switch(u, v, a3, w),
            ]
            yield _Plan(CaseLabel.VI, rel, steps, {'u': u, 'v': v, 'w': w})



def _plant_and_pivot(g: Graph, case: CaseLabel, rel: Switch, plant: Switch, aux: Dict[str, int]) -> Iterator[_Plan]:
    """Plant, run the two-step core on the planted graph, then unplant"""
    if not plant.is_valid(g):
        return
    planted = g.copy()
    apply_switch(planted, plant)
    for u in _pivots(planted, rel):
        steps = [plant] + _core(rel, u) + [plant.inverse()]
        yield _Plan(case, rel, steps, dict(aux, u=u))


def _three_steps(g, rel: Switch, uj: int) -> Iterator[Tuple[List[Switch], Dict[str, int]]]:
    """Length-3 paths using an edge w1w2 inside N(uj) minus a1"""
    a1, a3 = rel.a1, rel.a3
    D = rel.vertices
    around = sorted(g.neighbors(uj) - {a1})
    targets = sorted(_outside(g, a3, D))
    for w1, w2 in combinations(around, 2):
        if not g.has_edge(w1, w2):
            continue
        for x, y in ((w1, w2), (w2, w1)):
            for v in targets:
                yield [Switch(uj, y, a3, v), rel, Switch(uj, a3, y, v)], {'w1': x, 'w2': y, 'v': v}


def _heavy_plans(g: Graph, s: Switch) -> Iterator[_Plan]:
    """VII: plant on a vertex of D with degree at least 4"""
    D = s.vertices
    for x in sorted(D):
        if g.degree(x) < 4:
            continue
        rel = next(r for r in s.relabelings() if r.a1 == x)
        for r in combinations(sorted(_outside(g, x, D)), 3):
            for planted in _plantings(g, x, r):
                yield from _plant_and_pivot(g, CaseLabel.VII, rel, planted.switch, {})


def _linked_plans(g: Graph, s: Switch) -> Iterator[_Plan]:
    """VIIIa, VIIIb: a path of length 1, then 2, between A1 and A3"""
    D = s.vertices
    for length, case in ((1, CaseLabel.VIIIa), (2, CaseLabel.VIIIb)):
        for rel in s.relabelings():
            A1 = sorted(_outside(g, rel.a1, D))
            for u1 in A1:
                for v1 in sorted(_outside(g, rel.a3, D)):
                    if length == 1:
                        mids = [None] if g.has_edge(u1, v1) else []
                    else:
                        mids = sorted((g.neighbors(u1) & g.neighbors(v1)).difference(D))
                    for w in mids:
                        for u2 in A1:
                            if u2 == u1:
                                continue
                            aux = {'u1': u1, 'u2': u2, 'v1': v1}
                            if w is None:
                                plant = Switch(rel.a1, u2, v1, rel.a3)
                            else:
                                plant = Switch(rel.a1, u2, w, v1)
                                aux['w'] = w
                            yield from _plant_and_pivot(g, case, rel, plant, aux)


def _distant_plans(g: Graph, s: Switch) -> Iterator[_Plan]:
    """IXa, IXb, IXc: A1 and A3 at distance 3 or more"""
    D = s.vertices
    relabelings = s.relabelings()

    for rel in relabelings:
        for u in sorted(_outside(g, rel.a1, D)):
            for steps, aux in _three_steps(g, rel, u):
                yield _Plan(CaseLabel.IXa, rel, steps, dict(aux, u1=u))

    # planting happens on G minus a1a2, forcing a1 into the new triangle
    for rel in relabelings:
        a1 = rel.a1
        without = EdgeMaskedView(g, (a1, rel.a2))
        for u1 in sorted(_outside(g, a1, D)):
            for w1, w2 in combinations(sorted(g.neighbors(u1) - {a1}), 2):
                base = {'u1': u1, 'w1': w1, 'w2': w2}
                for planted in _plantings(without, u1, (a1, w1, w2), forced_first=a1):
                    yield from _plant_and_pivot(g, CaseLabel.IXb, rel, planted.switch, base)

    # 5-cycle a1 u1 wa z u2: plant u1 wa z, then the IXa steps, then unplant
    for rel in relabelings:
        a1 = rel.a1
        for u1, u2 in permutations(sorted(_outside(g, a1, D)), 2):
            for wa, wb in permutations(sorted(g.neighbors(u1) - {a1}), 2):
                for z in sorted((g.neighbors(wa) & g.neighbors(u2)).difference(D) - {u1}):
                    plant = Switch(u1, wb, z, u2)
                    if not plant.is_valid(g):
                        continue
                    planted = g.copy()
                    apply_switch(planted, plant)
                    for middle, aux in _three_steps(planted, rel, u1):
                        steps = [plant] + middle + [plant.inverse()]
                        yield _Plan(CaseLabel.IXc, rel, steps, dict(aux, u1=u1, u2=u2, z=z))


def _planted_plans(g: Graph, s: Switch) -> Iterator[_Plan]:
    yield from _heavy_plans(g, s)
    yield from _linked_plans(g, s)
    yield from _distant_plans(g, s)


def _replay(g: Graph, plan: _Plan, target: FrozenSet[Edge]) -> Optional[List[TriSwitch]]:
    current = g.copy()
    steps = []
    for sw in plan.switches:
        if not sw.is_valid(current) or not is_tri_switch(current, sw):
            return None
        steps.append(TriSwitch(sw, apply_switch(current, sw)))
    if current.edge_set() != target:
        return None
    return steps


def simulate_switch(g: Graph, s: Switch) -> SimulationPath:
    """Deterministic triangle-switch path realizing switch s on g"""
    s.validate(g)
    if g.min_degree() < 3:
        raise MinDegreeTooSmall(f"Minimum degree {g.min_degree()} is below 3")
    canonical = s.canonical()
    target = g.copy()
    apply_switch(target, s)
    target_edges = target.edge_set()

    local = _has_local_structure(g, canonical)
    plans = _direct_plans if local else _planted_plans
    candidates = plans(g, canonical)

    for plan in candidates:
        steps = _replay(g, plan, target_edges)
        if steps is None:
            logger.debug(f"Case {plan.case.value} candidate {plan.aux} rejected on replay")
            continue
        path = SimulationPath(plan.case, s, plan.relabeling, tuple(steps), plan.aux)
        if verify_paths_enabled():
            check = verify_path(g, s, path)
            if not check:
                raise InternalContradiction(f"Emitted path failed verification: {check.failure}")
        return path

    raise InternalContradiction(
        f"No simulation path for switch {s.vertices} "
        f"({'diagonal/shared/triangle' if local else 'isolated'} configuration)"
    )


def classify_case(g: Graph, s: Switch) -> CaseLabel:
    return simulate_switch(g, s).case


def verify_path(g: Graph, s: Switch, p: SimulationPath) -> PathVerification:
    """Replay p on a copy of g with full triangle recounts"""
    if not 1 <= len(p.steps) <= MAX_PATH_LENGTH:
        return PathVerification(False, f"path length {len(p.steps)} outside 1..{MAX_PATH_LENGTH}")
    if not s.is_valid(g):
        return PathVerification(False, "switch is not valid on the source graph")
    current = g.copy()
    for index, step in enumerate(p.steps):
        sw = step.switch
        if not sw.is_valid(current):
            return PathVerification(False, f"step {sw.vertices} is not a valid switch", index)
        if not is_tri_switch(current, sw):
            return PathVerification(False, f"step {sw.vertices} does not change the triangle set", index)
        before = count_triangles(current)
        apply_switch(current, sw)
        if count_triangles(current) - before != step.delta_t:
            return PathVerification(False, f"step {sw.vertices} recorded delta {step.delta_t} "
                                           f"but recount gives {count_triangles(current) - before}", index)
    target = g.copy()
    apply_switch(target, s)
    if current != target:
        return PathVerification(False, "path does not end at the switched graph")
    return PathVerification(True)
