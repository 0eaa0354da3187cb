"""Forward-time plan construction: plan state sets, robot timing and greedy assignment.

A placement occupies its brick's precedence/concurrence window
[start, placed_at), where placed_at = start + brick duration + robot speed
penalty. The robot then flies back to the reservoir for `return_time`
seconds and becomes idle at cycle_end.
"""
from __future__ import annotations

import enum
import heapq
import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .constraints import ConstraintGraph
from .errors import ConfigurationError, InfeasibleError, WallFormatError

_EPS = 1e-6


class RobotState(enum.Enum):
    WORKING = "working"
    RESTING = "resting"
    IDLE = "idle"


@dataclass(frozen=True)
class Robot:
    id: int
    speed_penalty: float = 0.0  # extra seconds per placement (10 s for the ground vehicle)
    return_time: float = 10.0  # flight back to the reservoir after a brick lands
    battery_budget: float = math.inf  # duty seconds between swaps
    battery_swap_time: float = 40.0
    kind: str = "uav"

    def __post_init__(self):
        if self.speed_penalty < 0 or self.return_time < 0:
            raise ConfigurationError("robot timing parameters must be non-negative")
        if not self.battery_budget > 0:
            raise ConfigurationError("battery budget must be positive")
        if self.battery_swap_time < 0:
            raise ConfigurationError("battery swap time must be non-negative")


def make_team(n: int, **kwargs) -> list[Robot]:
    """n identical robots with ids 0..n-1."""
    if n < 1:
        raise ConfigurationError("at least one robot is required")
    return [Robot(id=i, **kwargs) for i in range(n)]


def mixed_team(n_uav: int, n_ugv: int, ugv_penalty: float = 10.0, **kwargs) -> list[Robot]:
    team = [Robot(id=i, **kwargs) for i in range(n_uav)]
    team += [Robot(id=n_uav + i, speed_penalty=ugv_penalty, kind="ugv", **kwargs) for i in range(n_ugv)]
    return team


@dataclass(frozen=True)
class RobotStatus:
    state: RobotState
    assigned_node: Optional[int]
    busy_until: float


@dataclass(frozen=True, order=True)
class Placement:
    start: float
    robot: int
    brick: int
    placed_at: float
    cycle_end: float


@dataclass(frozen=True, order=True)
class BatterySwap:
    start: float
    robot: int
    end: float


@dataclass(frozen=True)
class Plan:
    placements: tuple[Placement, ...] = ()
    swaps: tuple[BatterySwap, ...] = ()
    robot_ids: tuple[int, ...] = ()
    reward: int = 0
    completion_time: float = 0.0
    total_bricks: int = 0
    preplaced: tuple[int, ...] = ()

    @property
    def bricks(self) -> list[int]:
        seen, out = set(), []
        for p in self.placements:
            if p.brick not in seen:
                seen.add(p.brick)
                out.append(p.brick)
        return out

    @property
    def progress(self) -> float:
        """Percentage of the wall standing when the plan ends."""
        if self.total_bricks == 0:
            return 100.0
        return 100.0 * (len(self.bricks) + len(self.preplaced)) / self.total_bricks

    @property
    def robots_used(self) -> int:
        return len({p.robot for p in self.placements})

    def timeline(self, robot_id: int) -> list:
        items = [p for p in self.placements if p.robot == robot_id]
        items += [s for s in self.swaps if s.robot == robot_id]
        return sorted(items, key=lambda x: x.start)

    def sort_key(self) -> tuple:
        """Smaller is better: more reward first, then earlier completion."""
        return (-self.reward, self.completion_time)

    def to_dict(self) -> dict:
        robots = []
        for rid in self.robot_ids:
            entries = []
            for item in self.timeline(rid):
                if isinstance(item, Placement):
                    entries.append({"brick": item.brick, "start": item.start,
                                    "placed_at": item.placed_at, "cycle_end": item.cycle_end})
                else:
                    entries.append({"swap": True, "start": item.start, "end": item.end})
            robots.append({"id": rid, "timeline": entries})
        return {
            "completion_time_s": self.completion_time,
            "reward": self.reward,
            "progress": self.progress,
            "total_bricks": self.total_bricks,
            "preplaced": list(self.preplaced),
            "robots": robots,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "Plan":
        try:
            placements, swaps, ids = [], [], []
            for robot in data["robots"]:
                rid = int(robot["id"])
                ids.append(rid)
                for e in robot["timeline"]:
                    if e.get("swap"):
                        swaps.append(BatterySwap(float(e["start"]), rid, float(e["end"])))
                    else:
                        pa = float(e["placed_at"])
                        placements.append(Placement(float(e["start"]), rid, int(e["brick"]), pa,
                                                    float(e.get("cycle_end", pa))))
            return cls(
                placements=tuple(sorted(placements)),
                swaps=tuple(sorted(swaps)),
                robot_ids=tuple(ids),
                reward=int(data["reward"]),
                completion_time=float(data["completion_time_s"]),
                total_bricks=int(data.get("total_bricks", len({p.brick for p in placements}))),
                preplaced=tuple(data.get("preplaced", ())),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise WallFormatError(f"malformed plan: {exc!r}") from exc

    @classmethod
    def from_json(cls, text: str) -> "Plan":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise WallFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


class PlanContext:
    """Index-based view of a graph and a team, shared read-only by all plan states."""

    def __init__(self, graph: ConstraintGraph, robots: Sequence[Robot], t_max: float = math.inf):
        if not robots:
            raise ConfigurationError("at least one robot is required")
        if len({r.id for r in robots}) != len(robots):
            raise ConfigurationError("robot ids must be unique")
        if not t_max > 0:
            raise ConfigurationError("T_max must be positive")
        self.graph = graph
        self.robots = tuple(robots)
        self.t_max = float(t_max)
        bricks = graph.blueprint.bricks
        self.ids = [b.id for b in bricks]
        index = {b.id: k for k, b in enumerate(bricks)}
        self.index = index
        self.n = len(bricks)
        self.reward = [b.reward for b in bricks]
        self.duration = [b.duration_s for b in bricks]
        self.required = [b.robots_required for b in bricks]
        self.n_preds = [len(graph.predecessors[i]) for i in self.ids]
        self.partners = [[index[j] for j in graph.partners[i]] for i in self.ids]
        self.preplaced = frozenset(index[b.id] for b in bricks if b.placed)
        # Z^e edges: (source index or -1 for the virtual start, target index)
        edges = [(-1, index[i]) for i in graph.entry_bricks]
        for i in self.ids:
            edges += [(index[i], index[j]) for j in graph.successors[i]]
        self.edges = edges
        self.start_edges = list(range(len(graph.entry_bricks)))
        self.out_edges = [[] for _ in range(self.n)]
        for e, (src, _dst) in enumerate(edges):
            if src >= 0:
                self.out_edges[src].append(e)
        self.penalty = [r.speed_penalty for r in robots]
        self.ret = [r.return_time for r in robots]
        self.budget = [r.battery_budget for r in robots]
        self.swap_time = [r.battery_swap_time for r in robots]
        self.has_battery = any(math.isfinite(b) for b in self.budget)
        self.infeasible = sorted(
            self.ids[k] for k in range(self.n) if self.required[k] > len(robots) and k not in self.preplaced
        )
        bad = _preplaced_violations(graph)
        if bad:
            raise InfeasibleError(f"pre-placed bricks rest on unplaced bricks: {bad}", bad)


def _preplaced_violations(graph: ConstraintGraph) -> list[int]:
    placed = {b.id for b in graph.blueprint.bricks if b.placed}
    return sorted({a for a in placed for b in graph.predecessors[a] if b not in placed})


class PlanState:
    """Mutable state of one plan construction (the five edge/node sets plus robot bookkeeping)."""

    def __init__(self, ctx: PlanContext, rng: random.Random):
        self.ctx = ctx
        self.rng = rng
        self.t = 0.0
        self.finished = False
        n = ctx.n
        self.unvisited_edges: set[int] = set(range(len(ctx.edges)))
        self.visited_edges: set[int] = set()
        self.unavailable: set[int] = set()
        self.available: set[int] = set()
        self.placed: set[int] = set(ctx.preplaced)
        self.in_progress: dict[int, tuple] = {}
        self._heap: list[tuple[float, int]] = []
        self._ready = list(ctx.start_edges)
        for k in ctx.preplaced:
            self._ready.extend(ctx.out_edges[k])
        self.missing = list(ctx.n_preds)
        self.blocked = [0] * n  # partners currently mid-placement
        R = len(ctx.robots)
        self.busy_until = [0.0] * R
        self.duty = [0.0] * R
        self.assigned: list[Optional[int]] = [None] * R
        self._work_window = [(0.0, 0.0)] * R
        self.placements: list[Placement] = []
        self.swaps: list[BatterySwap] = []
        self.reward = 0
        if len(self.placed) == n:
            self.finished = True

    @classmethod
    def initial(cls, ctx: PlanContext, seed=None) -> "PlanState":
        rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        return cls(ctx, rng)

    def copy(self, rng: Optional[random.Random] = None) -> "PlanState":
        new = PlanState.__new__(PlanState)
        new.ctx = self.ctx
        new.rng = rng if rng is not None else _clone_rng(self.rng)
        new.t = self.t
        new.finished = self.finished
        new.unvisited_edges = set(self.unvisited_edges)
        new.visited_edges = set(self.visited_edges)
        new.unavailable = set(self.unavailable)
        new.available = set(self.available)
        new.placed = set(self.placed)
        new.in_progress = dict(self.in_progress)
        new._heap = list(self._heap)
        new._ready = list(self._ready)
        new.missing = list(self.missing)
        new.blocked = list(self.blocked)
        new.busy_until = list(self.busy_until)
        new.duty = list(self.duty)
        new.assigned = list(self.assigned)
        new._work_window = list(self._work_window)
        new.placements = list(self.placements)
        new.swaps = list(self.swaps)
        new.reward = self.reward
        return new

    # -- queries -----------------------------------------------------------

    @property
    def placed_count(self) -> int:
        """Bricks placed by this plan (pre-placed bricks excluded)."""
        return len(self.placed) - len(self.ctx.preplaced)

    def ids_of(self, indices: Iterable[int]) -> set[int]:
        return {self.ctx.ids[k] for k in indices}

    @property
    def available_nodes(self) -> set[int]:
        return self.ids_of(self.available)

    @property
    def unavailable_nodes(self) -> set[int]:
        return self.ids_of(self.unavailable)

    @property
    def placed_nodes(self) -> set[int]:
        return self.ids_of(self.placed)

    def robot_status(self, r: int, t: Optional[float] = None) -> RobotStatus:
        t = self.t if t is None else t
        start, placed_at = self._work_window[r]
        busy = self.busy_until[r]
        if start <= t < placed_at:
            state = RobotState.WORKING
        elif t < busy:
            state = RobotState.RESTING
        else:
            state = RobotState.IDLE
        node = self.assigned[r]
        return RobotStatus(state, None if node is None else self.ctx.ids[node], busy)

    # -- construction steps -------------------------------------------------------

    def process_edges(self) -> None:
        edges, missing = self.ctx.edges, self.missing
        placed, progress, available, unavailable = self.placed, self.in_progress, self.available, self.unavailable
        for e in self._ready:
            self.unvisited_edges.discard(e)
            self.visited_edges.add(e)
            src, dst = edges[e]
            if src >= 0:
                missing[dst] -= 1
            if dst not in placed and dst not in progress and dst not in available:
                unavailable.add(dst)
        self._ready = []

    def find_available_nodes(self) -> None:
        missing = self.missing
        ready = [k for k in self.unavailable if missing[k] == 0]
        for k in ready:
            self.unavailable.discard(k)
            self.available.add(k)

    def assign_available_nodes(self) -> float:
        """Assign one max-reward assignable brick. Returns 0 on success, otherwise the
        smallest robot count that would allow an assignment (inf when nothing is available)."""
        ctx, t = self.ctx, self.t
        busy = self.busy_until
        idle = [r for r in range(len(busy)) if busy[r] <= t]
        need = math.inf
        best_reward, best = -1, []
        blocked, required, reward = self.blocked, ctx.required, ctx.reward
        n_idle = len(idle)
        for k in self.available:
            req = required[k]
            if req < need:
                need = req
            if blocked[k] or req > n_idle:
                continue
            if ctx.t_max < math.inf and t + ctx.duration[k] + max(ctx.penalty[r] for r in idle[:req]) > ctx.t_max + _EPS:
                continue
            rw = reward[k]
            if rw > best_reward:
                best_reward, best = rw, [k]
            elif rw == best_reward:
                best.append(k)
        if not best:
            return need
        if len(best) > 1:
            best.sort()
            k = best[self.rng.randrange(len(best))]
        else:
            k = best[0]
        self._start(k, idle[: required[k]])
        return 0

    def _start(self, k: int, team: list[int]) -> None:
        ctx, t = self.ctx, self.t
        placed_at = t + ctx.duration[k] + max(ctx.penalty[r] for r in team)
        for r in team:
            cycle_end = placed_at + ctx.ret[r]
            self.busy_until[r] = cycle_end
            self.duty[r] += cycle_end - t
            self.assigned[r] = k
            self._work_window[r] = (t, placed_at)
            self.placements.append(Placement(t, ctx.robots[r].id, ctx.ids[k], placed_at, cycle_end))
        self.available.discard(k)
        self.in_progress[k] = (t, placed_at, tuple(team))
        heapq.heappush(self._heap, (placed_at, k))
        blocked = self.blocked
        for p in ctx.partners[k]:
            blocked[p] += 1

    def update_time(self, needed: float) -> bool:
        """Advance t to when `needed` robots are idle at once, or to the next placement
        completion when enough robots already are. Returns False if time cannot advance."""
        t = self.t
        target = None
        R = len(self.busy_until)
        if needed != math.inf and 1 <= needed <= R:
            candidate = sorted(self.busy_until)[int(needed) - 1]
            if candidate > t:
                target = candidate
        if target is None and self._heap:
            target = self._heap[0][0]
        if target is None or target <= t and not self._heap:
            return False
        self.t = max(t, target)
        return True

    def place_assigned_nodes(self) -> None:
        heap, t = self._heap, self.t
        ctx = self.ctx
        while heap and heap[0][0] <= t:
            _, k = heapq.heappop(heap)
            _start, _pa, team = self.in_progress.pop(k)
            self.placed.add(k)
            self.reward += ctx.reward[k]
            for p in ctx.partners[k]:
                self.blocked[p] -= 1
            for r in team:
                if self.assigned[r] == k:
                    self.assigned[r] = None
            self._ready.extend(ctx.out_edges[k])

    def apply_battery(self) -> None:
        ctx = self.ctx
        if not ctx.has_battery or len(self.placed) + len(self.in_progress) >= ctx.n:
            return
        t = self.t
        for r in range(len(self.busy_until)):
            if self.busy_until[r] <= t and self.duty[r] >= ctx.budget[r] - _EPS:
                start = self.busy_until[r]
                end = start + ctx.swap_time[r]
                self.swaps.append(BatterySwap(start, ctx.robots[r].id, end))
                self.busy_until[r] = end
                self.duty[r] = 0.0

    def iterate_step(self) -> None:
        if self.finished:
            return
        if len(self.placed) == self.ctx.n:
            self.finished = True
            return
        self.process_edges()
        self.find_available_nodes()
        self.apply_battery()
        needed = self.assign_available_nodes()
        if needed == 0:
            return
        if not self.update_time(needed):
            self.finished = True
            return
        self.place_assigned_nodes()
        if self.t >= self.ctx.t_max or len(self.placed) == self.ctx.n:
            self.finished = True

    def run(self) -> "PlanState":
        while not self.finished:
            self.iterate_step()
        return self

    def to_plan(self) -> Plan:
        ctx = self.ctx
        done = [p for p in self.placements if ctx.index[p.brick] in self.placed]
        return Plan(
            placements=tuple(sorted(done)),
            swaps=tuple(sorted(self.swaps)),
            robot_ids=tuple(r.id for r in ctx.robots),
            reward=self.reward,
            completion_time=max((p.placed_at for p in done), default=0.0),
            total_bricks=ctx.n,
            preplaced=tuple(sorted(ctx.ids[k] for k in ctx.preplaced)),
        )


def _clone_rng(rng: random.Random) -> random.Random:
    new = random.Random()
    new.setstate(rng.getstate())
    return new


def construct_plan(graph: ConstraintGraph, robots: Sequence[Robot], seed=None, t_max: float = math.inf) -> Plan:
    """One greedy randomized construction from the initial state."""
    return PlanState.initial(PlanContext(graph, robots, t_max), seed).run().to_plan()


def validate_plan(plan: Plan, graph: ConstraintGraph, robots: Sequence[Robot], t_max: float = math.inf) -> list[str]:
    """Check a plan against precedence, concurrence, robot non-overlap and time bounds.

    Returns human-readable violations; an empty list means the plan is feasible.
    """
    bp = graph.blueprint
    issues: list[str] = []
    known = set(graph.brick_ids)
    robot_by_id = {r.id: r for r in robots}
    preplaced = {b.id for b in bp.bricks if b.placed}
    windows: dict[int, tuple[float, float]] = {}
    for p in plan.placements:
        if p.brick not in known:
            issues.append(f"brick {p.brick}: not part of the wall")
            continue
        if p.robot not in robot_by_id:
            issues.append(f"brick {p.brick}: unknown robot {p.robot}")
            continue
        if p.brick in preplaced:
            issues.append(f"brick {p.brick}: already standing but placed again")
        if p.start < -_EPS:
            issues.append(f"brick {p.brick}: starts before time zero")
        if p.start > t_max + _EPS or p.placed_at > t_max + _EPS:
            issues.append(f"brick {p.brick}: scheduled past T_max={t_max}")
        robot = robot_by_id[p.robot]
        expected = bp.brick(p.brick).duration_s + robot.speed_penalty
        if p.placed_at - p.start < expected - _EPS:
            issues.append(f"brick {p.brick}: placement takes {p.placed_at - p.start:g} s, needs {expected:g} s")
        if p.cycle_end < p.placed_at - _EPS:
            issues.append(f"brick {p.brick}: cycle ends before the brick is placed")
        if p.brick in windows:
            if windows[p.brick] != (p.start, p.placed_at):
                issues.append(f"brick {p.brick}: placed more than once")
        else:
            windows[p.brick] = (p.start, p.placed_at)

    for a, w in windows.items():
        for b in graph.predecessors[a]:
            if b in preplaced:
                continue
            if b not in windows:
                issues.append(f"precedence {b}->{a}: brick {a} placed but supporting brick {b} never is")
            elif windows[b][1] > w[0] + _EPS:
                issues.append(f"precedence {b}->{a}: brick {a} starts at {w[0]:g} before {b} lands at {windows[b][1]:g}")
    for rule in graph.concurrence:
        if rule.a in windows and rule.b in windows:
            (sa, ea), (sb, eb) = windows[rule.a], windows[rule.b]
            if sa < eb - _EPS and sb < ea - _EPS:
                issues.append(f"concurrence {rule.a}~{rule.b}: placements overlap in time")

    for rid in robot_by_id:
        spans = [(p.start, p.cycle_end, f"brick {p.brick}") for p in plan.placements if p.robot == rid]
        spans += [(s.start, s.end, "battery swap") for s in plan.swaps if s.robot == rid]
        spans.sort()
        for (s0, e0, what0), (s1, _e1, what1) in zip(spans, spans[1:]):
            if s1 < e0 - _EPS:
                issues.append(f"robot {rid}: {what0} and {what1} overlap")
    for s in plan.swaps:
        if s.robot not in robot_by_id:
            issues.append(f"battery swap for unknown robot {s.robot}")

    reward = sum(bp.brick(b).reward for b in windows)
    if reward != plan.reward:
        issues.append(f"reported reward {plan.reward} differs from placed reward {reward}")
    last = max((w[1] for w in windows.values()), default=0.0)
    if abs(last - plan.completion_time) > _EPS:
        issues.append(f"reported completion time {plan.completion_time:g} differs from last placement {last:g}")
    return issues
