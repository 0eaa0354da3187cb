"""Reference planners: layer-by-layer naive plan and an exact branch-and-bound oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

from .constraints import ConstraintGraph
from .engine import Placement, Plan, PlanContext, PlanState, Robot
from .errors import ConfigurationError, InfeasibleError


def gap(best_bound: float, best_integer: float) -> float:
    """Relative distance in percent between a bound and an incumbent."""
    return 100.0 * abs(best_bound - best_integer) / (abs(best_integer) + 1e-10)


# ---------------------------------------------------------------- naive planner

class _LayerByLayerState(PlanState):
    """Builds the lowest unfinished layer left to right; the next layer opens only
    once every brick below has landed. Concurrence rules still apply."""

    def __init__(self, ctx: PlanContext):
        super().__init__(ctx, rng=None)
        bp = ctx.graph.blueprint
        self._layer = [bp.layer_of(b) for b in bp.bricks]
        self._order = sorted(range(ctx.n), key=lambda k: (self._layer[k], bp.bricks[k].x))

    def copy(self, rng=None):
        raise NotImplementedError("the naive planner is never snapshotted")

    def assign_available_nodes(self) -> float:
        if not self.available:
            return math.inf
        current = min(self._layer[k] for k in self._order if k not in self.placed)
        t = self.t
        idle = [r for r, busy in enumerate(self.busy_until) if busy <= t]
        need = math.inf
        for k in self._order:
            if self._layer[k] != current or k not in self.available:
                continue
            need = min(need, self.ctx.required[k])
            if self.blocked[k] or self.ctx.required[k] > len(idle):
                continue
            if t + self.ctx.duration[k] + max(self.ctx.penalty[r] for r in idle[: self.ctx.required[k]]) \
                    > self.ctx.t_max + 1e-6:
                continue
            self._start(k, idle[: self.ctx.required[k]])
            return 0
        # nothing on the current layer can start yet: wait for a placement or a robot
        return need if need != math.inf else 1


def naive_plan(graph: ConstraintGraph, robots: Sequence[Robot], t_max: float = math.inf) -> Plan:
    """Traditional layer-by-layer plan. Deterministic; uses no randomness."""
    ctx = PlanContext(graph, robots, t_max)
    return _LayerByLayerState(ctx).run().to_plan()


# ---------------------------------------------------------------- exact oracle

@dataclass(frozen=True)
class OracleResult:
    optimal_T: float
    optimal_plan: Optional[Plan]
    states_explored: int
    leaves: int
    certified: bool


class _Budget(Exception):
    pass


class _Oracle:
    def __init__(self, ctx: PlanContext, limit: int):
        self.ctx = ctx
        self.limit = limit
        n = ctx.n
        self.n = n
        self.pred_mask = [0] * n
        for k, i in enumerate(ctx.ids):
            for j in ctx.graph.predecessors[i]:
                self.pred_mask[k] |= 1 << ctx.index[j]
        self.partner_mask = [0] * n
        for k in range(n):
            for p in ctx.partners[k]:
                self.partner_mask[k] |= 1 << p
        # robots grouped into interchangeable classes
        classes: dict[tuple, list[int]] = {}
        for r, robot in enumerate(ctx.robots):
            classes.setdefault((robot.speed_penalty, robot.return_time), []).append(r)
        self.class_keys = list(classes)
        self.class_members = [classes[c] for c in self.class_keys]
        self.topo = [ctx.index[i] for i in ctx.graph.topological_order()]
        self.min_pen = min(c[0] for c in self.class_keys)
        self.full = (1 << n) - 1
        self.states = 0
        self.leaves = 0
        self.best_T = math.inf
        self.best_path: Optional[list] = None
        self.memo: dict = {}
        self.path: list = []

    # state: t, placed mask, started mask, prog (sorted tuple of (placed_at, k)),
    # free: tuple per class of sorted robot free times
    def lower_bound(self, t, started, prog, free) -> float:
        ctx = self.ctx
        lb = max((pa for pa, _ in prog), default=t)
        unstarted = [k for k in range(self.n) if not started >> k & 1]
        if not unstarted:
            return lb
        # resources: identical shortest jobs on the robot pool
        dmin = min(ctx.duration[k] for k in unstarted)
        heap = []
        for (pen, ret), times in zip(self.class_keys, free):
            for f in times:
                heap.append([max(f, t), pen, ret])
        last = 0.0
        for _ in unstarted:
            best = min(heap, key=lambda h: h[0] + dmin + h[1])
            done = best[0] + dmin + best[1]
            last = max(last, done)
            best[0] = done + best[2]
        lb = max(lb, last)
        # precedence chains
        es = {}
        prog_end = {k: pa for pa, k in prog}
        for k in self.topo:
            if started >> k & 1:
                continue
            e = t
            for j in ctx.graph.predecessors[ctx.ids[k]]:
                jk = ctx.index[j]
                if jk in es:
                    e = max(e, es[jk] + ctx.duration[jk] + self.min_pen)
                elif jk in prog_end:
                    e = max(e, prog_end[jk])
            es[k] = e
            lb = max(lb, e + ctx.duration[k] + self.min_pen)
        return lb

    def run(self, preplaced_mask: int):
        self.search(0.0, preplaced_mask, preplaced_mask, (), tuple(tuple(0.0 for _ in m) for m in self.class_members),
                    0.0)

    def search(self, t, placed, started, prog, free, t_done):
        self.states += 1
        if self.states > self.limit:
            raise _Budget
        if started == self.full:
            T = max([t_done] + [pa for pa, _ in prog])
            self.leaves += 1
            if T < self.best_T:
                self.best_T = T
                self.best_path = list(self.path)
            return
        if self.lower_bound(t, started, prog, free) >= self.best_T:
            return
        key = (placed, started, tuple((k, pa - t) for pa, k in prog),
               tuple(tuple(max(0.0, f - t) for f in times) for times in free))
        seen = self.memo.get(key)
        if seen is not None and seen <= t:
            return
        self.memo[key] = t

        ctx = self.ctx
        blocked = 0
        for _pa, k in prog:
            blocked |= self.partner_mask[k]
        assignable = [k for k in range(self.n)
                      if not started >> k & 1 and self.pred_mask[k] & placed == self.pred_mask[k]
                      and not blocked >> k & 1
                      and ctx.required[k] == 1]
        idle = [sum(1 for f in times if f <= t) for times in free]
        total_idle = sum(idle)
        has_future = bool(prog) or any(f > t for times in free for f in times)

        options = []
        for size in range(min(total_idle, len(assignable)), 0, -1):
            for subset in combinations(assignable, size):
                if any(self.partner_mask[a] >> b & 1 for a, b in combinations(subset, 2)):
                    continue
                options.extend(self._class_choices(subset, idle))
        if has_future:
            options.append(())
        for choice in options:
            self._branch(t, placed, started, prog, free, t_done, choice)

    def _class_choices(self, subset, idle):
        """Ways to give each brick of `subset` a robot class with an idle robot left."""
        if len(self.class_keys) == 1:
            return [tuple((k, 0) for k in subset)]
        out = []

        def rec(i, left, acc):
            if i == len(subset):
                out.append(tuple(acc))
                return
            for c, n_left in enumerate(left):
                if n_left:
                    left[c] -= 1
                    acc.append((subset[i], c))
                    rec(i + 1, left, acc)
                    acc.pop()
                    left[c] += 1

        rec(0, list(idle), [])
        return out

    def _branch(self, t, placed, started, prog, free, t_done, choice):
        ctx = self.ctx
        free = [list(times) for times in free]
        prog = list(prog)
        for k, c in choice:
            pen, ret = self.class_keys[c]
            times = free[c]
            slot = next(i for i, f in enumerate(times) if f <= t)
            pa = t + ctx.duration[k] + pen
            times[slot] = pa + ret
            prog.append((pa, k))
            started |= 1 << k
        events = [pa for pa, _ in prog if pa > t] + [f for times in free for f in times if f > t]
        if not events:
            return  # nothing can ever happen again; dead end
        t_next = min(events)
        still = []
        for pa, k in prog:
            if pa <= t_next:
                placed |= 1 << k
                t_done = max(t_done, pa)
            else:
                still.append((pa, k))
        self.path.append((t, choice))
        self.search(t_next, placed, started, tuple(sorted(still)),
                    tuple(tuple(sorted(times)) for times in free), t_done)
        self.path.pop()

    def build_plan(self) -> Plan:
        ctx = self.ctx
        busy = [0.0] * len(ctx.robots)
        placements = []
        for t, choice in self.best_path or []:
            for k, c in choice:
                r = next(r for r in self.class_members[c] if busy[r] <= t)
                pen, ret = self.class_keys[c]
                pa = t + ctx.duration[k] + pen
                busy[r] = pa + ret
                placements.append(Placement(t, ctx.robots[r].id, ctx.ids[k], pa, pa + ret))
        return Plan(
            placements=tuple(sorted(placements)),
            robot_ids=tuple(r.id for r in ctx.robots),
            reward=sum(ctx.reward[ctx.index[p.brick]] for p in placements),
            completion_time=max((p.placed_at for p in placements), default=0.0),
            total_bricks=ctx.n,
            preplaced=tuple(sorted(ctx.ids[k] for k in ctx.preplaced)),
        )


def exact_oracle(graph: ConstraintGraph, robots: Sequence[Robot], limit: int = 2_000_000) -> OracleResult:
    """Minimum completion time for the whole wall by exhaustive event-driven search.

    Branches at every event time over which pairwise non-concurrent subsets of
    startable bricks to begin (including starting none and waiting). Prunes with
    a resource/precedence lower bound and by dominance on states that differ
    only by a time shift. When `limit` states are exceeded the best plan found
    so far is returned with certified=False.
    """
    ctx = PlanContext(graph, robots)
    if ctx.has_battery:
        raise ConfigurationError("the exact oracle does not model battery swaps")
    if ctx.infeasible or any(r > 1 for r in ctx.required):
        raise InfeasibleError("the oracle handles single-robot bricks only", ctx.infeasible)
    if ctx.n > 62:
        raise ConfigurationError("the exact oracle is meant for small walls")
    oracle = _Oracle(ctx, limit)
    pre = 0
    for k in ctx.preplaced:
        pre |= 1 << k
    certified = True
    try:
        oracle.run(pre)
    except _Budget:
        certified = False
    if pre == oracle.full:
        oracle.best_T, oracle.best_path = 0.0, []
    plan = oracle.build_plan() if oracle.best_path is not None else None
    return OracleResult(oracle.best_T, plan, oracle.states, oracle.leaves, certified)
