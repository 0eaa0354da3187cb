import itertools
import math

import pytest

from wallplan.constraints import (
    ConcurrenceRule,
    PrecedenceRule,
    build_concurrence,
    build_graph,
    build_precedence,
    center_distance,
)
from wallplan.errors import ConfigurationError, InfeasibleError
from wallplan.wall import Brick, BrickDimensions, BrickKind, WallBlueprint, generate_wall


class TestPrecedence:
    def test_interior_brick_rests_on_two(self, five_over_six):
        rules = build_precedence(five_over_six)
        assert {r.below for r in rules if r.above == 7} == {1, 2}

    def test_single_layer_empty(self):
        assert build_precedence(generate_wall(2.4, 0.2)) == set()

    @pytest.mark.parametrize("length", [1.8, 2.1, 2.4, 2.7, 3.0, 3.6])
    def test_interior_full_bricks_have_two_supports(self, length):
        bp = generate_wall(length, 0.4)
        rules = build_precedence(bp)
        top = bp.layers[1]
        for i in top[1:-1]:
            if bp.brick(i).kind is BrickKind.FULL:
                assert len([r for r in rules if r.above == i]) == 2

    def test_matches_brute_force(self):
        bp = generate_wall(3.3, 1.0)
        d = bp.dims
        expected = set()
        for a, b in itertools.permutations(bp.bricks, 2):
            if bp.layer_of(a) != bp.layer_of(b) + 1:
                continue
            la, lb = d.length_of(a.kind), d.length_of(b.kind)
            overlap = min(a.x + la / 2, b.x + lb / 2) - max(a.x - la / 2, b.x - lb / 2)
            if overlap > 1e-9:
                expected.add(PrecedenceRule(b.id, a.id))
        assert build_precedence(bp) == expected

    def test_every_upper_brick_supported(self):
        bp = generate_wall(3.6, 1.2)
        rules = build_precedence(bp)
        for b in bp.bricks:
            if bp.layer_of(b) > 0:
                assert any(r.above == b.id for r in rules)
            assert all(bp.layer_of(bp.brick(r.above)) == bp.layer_of(bp.brick(r.below)) + 1 for r in rules)


class TestConcurrence:
    def test_wall18_neighbours_paired(self, wall18):
        rules = build_concurrence(wall18, d_min=0.8)
        for ids in wall18.layers:
            for a, b in zip(ids, ids[1:]):
                assert ConcurrenceRule(a, b) in rules

    def test_single_brick(self):
        assert build_concurrence(generate_wall(0.6, 0.2), d_place=1.5) == set()

    def test_nearest_neighbours(self):
        bp = generate_wall(2.4, 0.6)
        rules = build_concurrence(bp, d_place=1.0000001)
        dists = {(a.id, b.id): center_distance(a, b) for a, b in itertools.combinations(bp.bricks, 2)}
        closest = min(dists.values())
        expected = {ConcurrenceRule(a, b) for (a, b), d in dists.items() if abs(d - closest) < 1e-9}
        assert rules == expected

    def test_symmetric_irreflexive(self):
        r = ConcurrenceRule(5, 2)
        assert (r.a, r.b) == (2, 5) and r == ConcurrenceRule(2, 5)
        with pytest.raises(ValueError):
            ConcurrenceRule(3, 3)

    def test_monotone_in_d_place(self):
        bp = generate_wall(2.4, 0.6)
        prev = set()
        for dp in [1.0, 1.5, 2.0, 2.5, 3.0, 4.0]:
            cur = build_concurrence(bp, d_place=dp)
            assert prev <= cur
            prev = cur

    def test_d_place_below_one_rejected(self):
        with pytest.raises(ConfigurationError):
            build_concurrence(generate_wall(2.4, 0.4), d_place=0.5)


class TestGraph:
    def test_five_over_six_virtual_nodes(self, five_over_six):
        g = build_graph(five_over_six, 3, d_min=0.8)
        assert g.entry_bricks == (1, 2, 3, 4, 5)
        assert g.exit_bricks == (6, 7, 8, 9, 10, 11)
        assert g.start_nodes == (12, 13, 14) and g.end_node == 15

    def test_one_brick_one_robot(self):
        g = build_graph(generate_wall(0.6, 0.2), 1, d_min=0.8)
        assert g.node_count == 3
        assert g.entry_bricks == (1,) and g.exit_bricks == (1,)

    @pytest.mark.parametrize("robots", [1, 2, 5])
    def test_node_count(self, wall18, robots):
        assert build_graph(wall18, robots).node_count == 18 + robots + 1

    def test_zero_robots(self, wall18):
        with pytest.raises(ConfigurationError):
            build_graph(wall18, 0)

    def test_travel_time(self, five_over_six):
        g = build_graph(five_over_six, 2, d_min=0.8)
        assert g.travel_time(1, 2, 10.0) == 10.0
        assert g.travel_time(g.start_nodes[0], 1, 10.0) == 0.0
        assert g.travel_time(1, g.end_node, 10.0) == 0.0

    def test_topological_order(self, graph18):
        order = graph18.topological_order()
        pos = {b: k for k, b in enumerate(order)}
        assert all(pos[r.below] < pos[r.above] for r in graph18.precedence)

    def test_floating_brick_infeasible(self):
        bricks = (Brick(1, BrickKind.FULL, (0.3, 0, 0)), Brick(2, BrickKind.FULL, (2.0, 0, 0.2)))
        with pytest.raises(InfeasibleError) as err:
            build_graph(WallBlueprint(bricks, BrickDimensions(), 2.3, 0.4), 1)
        assert err.value.bricks == (2,)

    def test_edge_dump(self, five_over_six):
        text = build_graph(five_over_six, 1, d_min=0.8).dump_edges()
        assert "P 1 7\n" in text and "P 2 7\n" in text and "C 1 2\n" in text
        assert text == build_graph(five_over_six, 1, d_min=0.8).dump_edges()
