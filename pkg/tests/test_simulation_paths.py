from itertools import combinations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given

from modules.chains import ChainConfig, ChainKind, run_chain
from modules.errors import InvalidSwitch, MinDegreeTooSmall, NonGraphical, PlantImpossible
from modules.graph_core import (
    DegreeSequence,
    Graph,
    Switch,
    apply_switch,
    from_degree_sequence,
    is_tri_switch,
    random_nonincident_edge_pair,
    triangle_set,
)
from modules.simulation_paths import (
    CASE_LENGTH,
    MAX_PATH_LENGTH,
    CaseLabel,
    SimulationPath,
    classify_case,
    plant_triangle,
    simulate_switch,
    verify_path,
)
from oracles import PROPERTY_SETTINGS, graphs_with_switch


def all_switches(g):
    for (x1, x2), (x3, x4) in combinations(sorted(g.edges()), 2):
        for s in (Switch(x1, x2, x3, x4), Switch(x1, x2, x4, x3)):
            if s.is_valid(g):
                yield s


def assert_simulates(g, s):
    path = simulate_switch(g, s)
    check = verify_path(g, s, path)
    assert check, check.failure
    assert 1 <= len(path) <= MAX_PATH_LENGTH
    assert len(path) <= CASE_LENGTH[path.case]
    return path


class TestSimulateSwitch:
    def test_triangle_switch_is_its_own_path(self, k33):
        s = Switch(0, 3, 1, 4)
        path = assert_simulates(k33, s)
        assert path.case is CaseLabel.I
        assert len(path) == 1
        assert path.steps[0].delta_t == 2

    def test_inter_clique_switch(self, two_k4):
        s = Switch(0, 1, 4, 5)
        path = assert_simulates(two_k4, s)
        assert path.case is CaseLabel.I
        assert path.steps[0].delta_t == -4

    def test_every_switch_of_the_petersen_graph(self, petersen):
        cases = set()
        count = 0
        for s in all_switches(petersen):
            cases.add(assert_simulates(petersen, s).case)
            count += 1
        assert count > 0
        # triangle-free with girth 5: some switches need a planted triangle
        assert cases - {CaseLabel.I}

    def test_every_switch_of_the_prism(self, prism):
        for s in all_switches(prism):
            assert_simulates(prism, s)

    def test_deterministic(self, petersen):
        s = next(all_switches(petersen))
        assert simulate_switch(petersen, s) == simulate_switch(petersen, s)
        assert classify_case(petersen, s) is simulate_switch(petersen, s).case

    def test_relabelings_share_a_path(self, petersen):
        s = next(s for s in all_switches(petersen) if not is_tri_switch(petersen, s))
        paths = [simulate_switch(petersen, r) for r in s.relabelings()]
        assert len({(p.case, tuple(st.switch for st in p.steps)) for p in paths}) == 1

    def test_minimum_degree_below_three(self, cycle5):
        s = Switch(0, 1, 2, 3)
        assert s.is_valid(cycle5)
        with pytest.raises(MinDegreeTooSmall):
            simulate_switch(cycle5, s)

    def test_invalid_switch(self, petersen):
        with pytest.raises(InvalidSwitch):
            simulate_switch(petersen, Switch(0, 2, 1, 3))

    def test_verification_catches_a_wrong_endpoint(self, k33):
        s = Switch(0, 3, 1, 4)
        path = simulate_switch(k33, s)
        other = Switch(0, 3, 2, 5)
        forged = SimulationPath(path.case, other, other, path.steps)
        check = verify_path(k33, other, forged)
        assert not check
        assert check.failure

    @PROPERTY_SETTINGS
    @given(case=graphs_with_switch())
    def test_random_graphs_and_switches(self, case):
        g, s = case
        path = assert_simulates(g, s)
        end = g.copy()
        for step in path.steps:
            apply_switch(end, step.switch)
        target = g.copy()
        apply_switch(target, s)
        assert end == target


def doubled(n, edges):
    """Two disjoint copies of a graph on n vertices"""
    edges = list(edges)
    return Graph.from_edges(2 * n, edges + [(u + n, v + n) for u, v in edges])


def assert_planted_then_unplanted(path):
    assert path.steps[-1].switch == path.steps[0].switch.inverse()


PLANTED_CASES = {CaseLabel.VII, CaseLabel.VIIIa, CaseLabel.VIIIb, CaseLabel.IXa, CaseLabel.IXb, CaseLabel.IXc}


class TestIsolatedSwitches:
    """Switches with no diagonal, no shared neighbour and no triangle at the four vertices"""

    def test_degree_four_vertex_gets_a_planted_triangle(self):
        k44 = [(a, b) for a in range(4) for b in range(4, 8)]
        g = doubled(8, k44)
        path = assert_simulates(g, Switch(0, 4, 8, 12))
        assert path.case is CaseLabel.VII
        assert len(path) == 4
        assert path.steps[0].switch == Switch(0, 7, 1, 6)
        assert_planted_then_unplanted(path)

    def test_edge_between_neighbourhoods(self):
        mcgee = nx.LCF_graph(24, [12, 7, -7], 8)
        g = Graph.from_edges(24, mcgee.edges())
        cases = {}
        for s in all_switches(g):
            path = assert_simulates(g, s)
            cases[path.case] = cases.get(path.case, 0) + 1
            if path.case in PLANTED_CASES:
                assert_planted_then_unplanted(path)
        assert CaseLabel.VIIIa in cases
        assert CaseLabel.VIIIb in cases

    def test_triangle_next_to_the_switch(self):
        # 0 and 1 each sit between two vertices sharing a triangle edge
        half = [(0, 1), (0, 2), (0, 3), (1, 6), (1, 7), (2, 4), (2, 5), (3, 4), (3, 5), (4, 5),
                (6, 8), (6, 9), (7, 8), (7, 9), (8, 9)]
        g = doubled(10, half)
        path = assert_simulates(g, Switch(0, 1, 10, 11))
        assert path.case is CaseLabel.IXa
        assert len(path) == 3
        assert path.steps[0].switch == Switch(2, 5, 10, 12)
        assert path.steps[1].switch == Switch(0, 1, 10, 11)

    def test_planting_on_the_graph_without_the_switch_edge(self):
        k33 = [(a, b) for a in range(3) for b in range(3, 6)]
        g = doubled(6, k33)
        path = assert_simulates(g, Switch(0, 3, 6, 9))
        assert path.case is CaseLabel.IXb
        assert len(path) == 4
        assert path.steps[0].switch == Switch(4, 2, 5, 1)
        assert_planted_then_unplanted(path)

    def test_cubic_graph_with_distant_edges(self):
        g = Graph.from_edges(30, nx.random_regular_graph(3, 30, seed=796487718).edges())
        s = Switch(11, 12, 27, 22)
        assert s.is_valid(g)
        path = assert_simulates(g, s)
        assert path.case in PLANTED_CASES
        if path.case is not CaseLabel.IXa:
            assert_planted_then_unplanted(path)

    @pytest.mark.slow
    def test_ten_thousand_random_instances(self):
        rng = np.random.default_rng(20240601)
        instances = 0
        cases = set()
        while instances < 10_000:
            n = int(rng.integers(8, 17))
            degrees = rng.integers(3, 6, size=n)
            if degrees.sum() % 2:
                degrees[0] += 1
            try:
                d = DegreeSequence(tuple(degrees))
            except NonGraphical:
                continue
            seed = int(rng.integers(2 ** 31))
            g = from_degree_sequence(d, seed=seed)
            g = run_chain(g, ChainConfig(seed=seed, steps=200), ChainKind.SWITCH).final_graph
            for _ in range(20):
                (x1, x2), (x3, x4) = random_nonincident_edge_pair(g, rng)
                s = Switch(x1, x2, x3, x4) if rng.random() < 0.5 else Switch(x1, x2, x4, x3)
                if not s.is_valid(g):
                    continue
                cases.add(assert_simulates(g, s).case)
                instances += 1
        assert cases - {CaseLabel.I}


class TestPlanting:
    def test_plant_on_triangle_free_graph(self, petersen):
        v = 0
        planted = plant_triangle(petersen, v, sorted(petersen.neighbors(v)))
        assert planted.delta_t > 0
        assert is_tri_switch(petersen, planted.switch)
        g = petersen.copy()
        apply_switch(g, planted.switch)
        assert any(g.has_edge(a, b) for a, b in combinations(g.neighbors(v), 2))

    def test_plant_through_a_four_cycle(self, k33):
        planted = plant_triangle(k33, 0, [3, 4, 5])
        g = k33.copy()
        apply_switch(g, planted.switch)
        assert g.t == planted.delta_t > 0

    def test_planting_may_break_another_triangle(self):
        g = Graph.from_edges(6, [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (2, 5), (4, 5)])
        planted = plant_triangle(g, 0, [1, 2, 3])
        assert planted.switch == Switch(0, 3, 4, 2)
        assert planted.delta_t == 0
        h = g.copy()
        apply_switch(h, planted.switch)
        assert triangle_set(h) == {(0, 1, 4)}

    def test_nothing_to_plant(self):
        star = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
        with pytest.raises(PlantImpossible):
            plant_triangle(star, 0, [1, 2, 3], forced_first=1)
