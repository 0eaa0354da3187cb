import math
import random

import pytest

from wallplan import build_graph, construct_plan, generate_wall, make_team, mixed_team, validate_plan
from wallplan.datasets import SMALL_SETS, load_fixture
from wallplan.engine import Placement, Plan, PlanContext, PlanState, RobotState
from wallplan.errors import InfeasibleError


def fresh(graph, robots, seed=0):
    return PlanState.initial(PlanContext(graph, robots), seed)


def finish(state, idx, robot, t):
    """Start brick index `idx` on `robot` at time t and land it."""
    state.t = t
    state._start(idx, [robot])
    state.t = state.in_progress[idx][1]
    state.place_assigned_nodes()
    state.process_edges()
    state.find_available_nodes()


class TestSteps:
    def test_first_step_opens_bottom_layer(self, five_over_six, team3):
        st = fresh(build_graph(five_over_six, team3, d_min=0.8), team3)
        st.process_edges()
        st.find_available_nodes()
        assert st.available_nodes == {1, 2, 3, 4, 5}

    def test_brick7_needs_both_supports(self, five_over_six, team3):
        g = build_graph(five_over_six, team3, d_min=0.8)
        st = fresh(g, team3)
        st.process_edges()
        st.find_available_nodes()
        ix = st.ctx.index
        finish(st, ix[1], 0, 0.0)
        assert st.missing[ix[7]] == 1 and 7 not in st.available_nodes
        assert 7 in st.unavailable_nodes
        finish(st, ix[2], 1, 40.0)
        assert 7 in st.available_nodes

    def test_edges_fire_once(self, five_over_six, team3):
        st = fresh(build_graph(five_over_six, team3, d_min=0.8), team3)
        st.process_edges()
        visited = set(st.visited_edges)
        st.process_edges()
        assert st.visited_edges == visited
        assert not (st.visited_edges & st.unvisited_edges)

    def test_finished_step_is_noop(self, wall5, team3):
        st = fresh(build_graph(wall5, team3), team3).run()
        before = (st.t, st.reward, len(st.placements))
        st.iterate_step()
        assert st.finished and (st.t, st.reward, len(st.placements)) == before

    def test_wall5_160(self, wall5, team3):
        plan = construct_plan(build_graph(wall5, team3), team3, seed=1)
        assert plan.completion_time == 160.0 and plan.reward == 8

    def test_sets_partition(self, wall18, team3):
        st = fresh(build_graph(wall18, team3), team3)
        while not st.finished:
            st.iterate_step()
            assert not (st.available & st.unavailable)
            assert not (st.placed & (st.available | st.unavailable))
            assert not (set(st.in_progress) & (st.available | st.unavailable | st.placed))


class TestAssign:
    def test_full_beats_half(self):
        bp = generate_wall(1.5, 0.2)  # F F H
        team = make_team(1)
        st = fresh(build_graph(bp, team, d_min=0.1), team)
        st.process_edges()
        st.find_available_nodes()
        assert st.assign_available_nodes() == 0
        (k,) = st.in_progress
        assert bp.bricks[k].kind.value == "full"

    def test_single_node(self):
        team = make_team(1)
        st = fresh(build_graph(generate_wall(0.6, 0.2), team), team)
        st.process_edges()
        st.find_available_nodes()
        assert st.assign_available_nodes() == 0
        assert st.robot_status(0).assigned_node == 1

    def test_nothing_available(self, wall5, team3):
        st = fresh(build_graph(wall5, team3), team3)
        assert st.assign_available_nodes() == math.inf

    def test_tie_break_uniform(self):
        bp = generate_wall(1.2, 0.2)
        team = make_team(1)
        ctx = PlanContext(build_graph(bp, team, d_min=0.1), team)
        first = 0
        trials = 10_000
        for seed in range(trials):
            st = PlanState.initial(ctx, seed)
            st.process_edges()
            st.find_available_nodes()
            st.assign_available_nodes()
            first += 0 in st.in_progress
        assert abs(first / trials - 0.5) <= 0.02

    def test_busy_robot_not_reused(self, wall18):
        team = make_team(1)
        st = fresh(build_graph(wall18, team), team)
        st.process_edges()
        st.find_available_nodes()
        assert st.assign_available_nodes() == 0
        assert st.assign_available_nodes() == 1
        assert len(st.in_progress) == 1


class TestTime:
    @pytest.fixture
    def state(self, wall5, team3):
        return fresh(build_graph(wall5, team3), team3)

    def test_histogram(self, state):
        state.busy_until = [40.0, 50.0, 60.0]
        assert state.update_time(2) and state.t == 50.0

    def test_earliest(self, state):
        state.busy_until = [40.0, 50.0, 60.0]
        assert state.update_time(1) and state.t == 40.0

    def test_all_idle(self, state):
        assert not state.update_time(1)
        assert state.t == 0.0

    def test_uav_and_ugv_windows(self, wall5):
        team = mixed_team(1, 1)
        plan = construct_plan(build_graph(wall5, team), team, seed=3)
        spans = {p.robot: p.placed_at - p.start for p in plan.placements}
        assert spans == {0: 40.0, 1: 50.0}
        assert all(p.cycle_end - p.placed_at == 10.0 for p in plan.placements)

    def test_robot_states(self, wall5, team3):
        st = fresh(build_graph(wall5, team3), team3)
        st.process_edges()
        st.find_available_nodes()
        st.assign_available_nodes()
        assert st.robot_status(0, 0.0).state is RobotState.WORKING
        assert st.robot_status(0, 45.0).state is RobotState.RESTING
        assert st.robot_status(0, 50.0).state is RobotState.IDLE

    def test_finite_t_max(self, wall18, team3):
        g = build_graph(wall18, team3)
        plan = construct_plan(g, team3, seed=0, t_max=200.0)
        assert 0 < plan.progress < 100
        assert plan.completion_time <= 200.0
        assert validate_plan(plan, g, team3, t_max=200.0) == []


class TestBattery:
    def test_unlimited_no_swaps(self, graph18, team3):
        assert construct_plan(graph18, team3, seed=0).swaps == ()

    def test_swaps_happen(self, wall18):
        team = make_team(3, battery_budget=200.0, battery_swap_time=40.0)
        g = build_graph(wall18, team)
        plan = construct_plan(g, team, seed=0)
        assert len(plan.swaps) >= 2
        assert all(s.end - s.start == 40.0 for s in plan.swaps)
        assert all(180.0 <= s.start <= 260.0 for s in plan.swaps)
        assert validate_plan(plan, g, team) == []


class TestValidate:
    def plan_of(self, placements, reward, t):
        return Plan(tuple(placements), (), (0, 1, 2), reward, t, 11, ())

    def test_impractical_order(self, five_over_six, team3):
        g = build_graph(five_over_six, team3, d_min=0.8)
        plan = self.plan_of([Placement(0, 0, 7, 40, 50), Placement(50, 0, 1, 90, 100),
                             Placement(50, 1, 3, 90, 100), Placement(100, 0, 2, 140, 150)], 8, 140)
        issues = validate_plan(plan, g, team3)
        assert any(i.startswith("precedence 1->7") for i in issues)
        assert any(i.startswith("precedence 2->7") for i in issues)

    def test_adjacent_simultaneous(self, five_over_six, team3):
        g = build_graph(five_over_six, team3, d_min=0.8)
        plan = self.plan_of([Placement(0, 0, 1, 40, 50), Placement(0, 1, 2, 40, 50)], 4, 40)
        assert any("concurrence 1~2" in i for i in validate_plan(plan, g, team3))

    def test_robot_overlap(self, five_over_six, team3):
        g = build_graph(five_over_six, team3, d_min=0.8)
        plan = self.plan_of([Placement(0, 0, 1, 40, 50), Placement(45, 0, 3, 85, 95)], 4, 85)
        assert any("robot 0" in i for i in validate_plan(plan, g, team3))

    def test_short_window_and_bad_totals(self, five_over_six, team3):
        g = build_graph(five_over_six, team3, d_min=0.8)
        plan = self.plan_of([Placement(0, 0, 1, 30, 40)], 5, 99)
        issues = validate_plan(plan, g, team3)
        assert any("needs 40" in i for i in issues)
        assert any("reward" in i for i in issues)
        assert any("completion time" in i for i in issues)

    def test_empty_plan_is_legal(self, five_over_six, team3):
        g = build_graph(five_over_six, team3, d_min=0.8)
        assert validate_plan(self.plan_of([], 0, 0.0), g, team3) == []

    @pytest.mark.parametrize("name", ["wall_5", "wall_18", "wall_39"] + list(SMALL_SETS)[:4])
    @pytest.mark.parametrize("seed", range(5))
    def test_generated_plans_valid(self, name, seed):
        bp = load_fixture(name)
        for team in (make_team(3), mixed_team(2, 1), make_team(3, battery_budget=200.0)):
            g = build_graph(bp, team)
            plan = construct_plan(g, team, seed=seed)
            assert validate_plan(plan, g, team) == []
            assert plan.reward == sum(b.reward for b in bp.bricks)


class TestPlan:
    def test_determinism(self, graph18, team3):
        a = construct_plan(graph18, team3, seed=42).to_json()
        b = construct_plan(graph18, team3, seed=42).to_json()
        assert a == b

    def test_json_round_trip(self, graph18, team3):
        plan = construct_plan(graph18, team3, seed=5)
        assert Plan.from_json(plan.to_json()) == plan

    def test_critical_path_bound(self, graph18, team3):
        layers = len(graph18.blueprint.layers)
        for seed in range(10):
            assert construct_plan(graph18, team3, seed=seed).completion_time >= layers * 40.0

    def test_monotone_in_robots(self, wall18):
        means = []
        for n in range(2, 6):
            team = make_team(n)
            g = build_graph(wall18, team)
            means.append(sum(construct_plan(g, team, seed=s).completion_time for s in range(30)) / 30)
        assert all(b <= a + 1e-9 for a, b in zip(means, means[1:]))

    def test_preplaced_must_be_supported(self, wall18, team3):
        bp = wall18.with_placed([wall18.layers[1][0]])
        with pytest.raises(InfeasibleError):
            PlanContext(build_graph(bp, team3), team3)

    def test_rng_objects_accepted(self, graph18, team3):
        a = construct_plan(graph18, team3, seed=random.Random(9))
        assert a == construct_plan(graph18, team3, seed=9)
