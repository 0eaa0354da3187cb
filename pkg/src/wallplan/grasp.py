"""GRASP optimizer: randomized greedy constructions, snapshots and snapshot re-planning."""
from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .constraints import ConstraintGraph, build_graph
from .engine import Plan, PlanContext, PlanState, Robot
from .errors import ConfigurationError
from .wall import WallBlueprint

log = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


def child_seed(master: int, i: int) -> int:
    """splitmix64 of (master, i): a distinct reproducible seed per iteration."""
    z = (master * 0x9E3779B97F4A7C15 + (i + 1) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class GraspConfig:
    k_max: int = 1000
    k_max_not_improved: int = 100
    upsilon: float = 0.1
    seed: int = 0
    t_max: float = math.inf

    def __post_init__(self):
        if self.k_max < 1:
            raise ConfigurationError("k_max must be at least 1")
        if self.k_max_not_improved < 1:
            raise ConfigurationError("k_max_not_improved must be at least 1")
        if not 0 < self.upsilon <= 1:
            raise ConfigurationError("upsilon must lie in (0, 1]")


@dataclass(frozen=True)
class SolutionRecord:
    plan: Plan
    iterations: int = 0

    @property
    def reward(self) -> int:
        return self.plan.reward

    @property
    def completion_time(self) -> float:
        return self.plan.completion_time

    def better_than(self, other: "SolutionRecord") -> bool:
        return self.plan.sort_key() < other.plan.sort_key()


@dataclass
class Snapshot:
    state: PlanState
    placed_count: int


def snapshot_count(b_star: int, upsilon: float) -> int:
    """|Δ_s|: Υ·B* rounded half up, at least 1 (and never more than B*)."""
    if b_star <= 0:
        return 0
    return max(1, min(b_star, math.floor(upsilon * b_star + 0.5)))


def snapshot_positions(b_star: int, upsilon: float, rng: random.Random) -> set[int]:
    """Δ_s: distinct placement counts drawn uniformly from 1..B*."""
    k = snapshot_count(b_star, upsilon)
    return set(rng.sample(range(1, b_star + 1), k)) if k else set()


def greedy_randomized_construction(initial: PlanState, b_star_max: int, upsilon: float):
    """Run `initial` to completion, copying the state whenever the placement counter hits Δ_s.

    `initial` is advanced in place; returns (plan, snapshots).
    """
    state = initial
    positions = snapshot_positions(b_star_max, upsilon, state.rng)
    snapshots: list[Snapshot] = []
    placed_nodes = 0
    while not state.finished:
        before = state.reward
        state.iterate_step()
        if state.reward > before:
            placed_nodes += 1
            if placed_nodes in positions and not state.finished:
                snapshots.append(Snapshot(state.copy(), placed_nodes))
    return state.to_plan(), snapshots


def local_search(snapshots: Sequence[Snapshot], plan: Optional[Plan] = None,
                 rng: Optional[random.Random] = None) -> Optional[Plan]:
    """Re-plan forward from each snapshot and keep the best plan (the input plan included)."""
    best = plan
    for snap in snapshots:
        state = snap.state.copy(rng=rng) if rng is not None else snap.state.copy()
        candidate = state.run().to_plan()
        if best is None or candidate.sort_key() < best.sort_key():
            best = candidate
    return best


def _check_feasible(ctx: PlanContext) -> None:
    from .errors import InfeasibleError

    if ctx.infeasible:
        raise InfeasibleError(f"bricks need more robots than the team has: {ctx.infeasible}", ctx.infeasible)


def grasp_optimize(graph: ConstraintGraph, robots: Sequence[Robot], config: GraspConfig = GraspConfig()
                   ) -> SolutionRecord:
    ctx = PlanContext(graph, robots, config.t_max)
    _check_feasible(ctx)
    remaining = ctx.n - len(ctx.preplaced)

    # found solution: one plain greedy construction from the initial state
    found = PlanState.initial(ctx, child_seed(config.seed, 0)).run().to_plan()
    best = found
    b_star = remaining
    k_iter = k_not_improved = 0
    while k_iter < config.k_max and k_not_improved < config.k_max_not_improved:
        rng = random.Random(child_seed(config.seed, k_iter + 1))
        plan, snapshots = greedy_randomized_construction(PlanState(ctx, rng), b_star, config.upsilon)
        solution = local_search(snapshots, plan, rng)
        if solution.sort_key() < best.sort_key():
            best = solution
            log.info("iter=%d reward=%d T=%g", k_iter, best.reward, best.completion_time)
        else:
            k_not_improved += 1
        b_star = max(1, len(best.bricks))
        k_iter += 1
    if found.reward >= best.reward and found.completion_time < best.completion_time:
        best = found
    return SolutionRecord(best, k_iter)


def replan_from_partial(blueprint: WallBlueprint, robots: Sequence[Robot], config: GraspConfig = GraspConfig(),
                        d_min: Optional[float] = None, d_place: Optional[float] = None) -> SolutionRecord:
    """Plan the rest of a semi-built wall; bricks flagged `placed` are treated as standing."""
    graph = build_graph(blueprint, robots, d_place=d_place, d_min=d_min)
    return grasp_optimize(graph, robots, config)
