"""Benchmark suites over the shipped fixtures, with published reference numbers for context."""
from __future__ import annotations

import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Optional

from .baselines import exact_oracle, naive_plan
from .constraints import DEFAULT_D_MIN, build_graph
from .datasets import BENCH_WALLS, SMALL_SETS, load_fixture
from .engine import make_team, mixed_team
from .grasp import GraspConfig, grasp_optimize
from .wall import wall_reward_total

SUITES = ("scaling", "small-sets", "robots", "battery")

# Published reference values, carried as constants for side-by-side reports only.
REFERENCE_SCALING = {
    # wall: (CPLEX progress %, CPLEX T', CPLEX GAP %, GRASP T', GRASP runtime ms)
    "wall_5": (100, 160, 0.00, 160, 35.69),
    "wall_18": (100, 360, 0.01, 353, 27.87),
    "wall_39": (100, 710, 0.39, 680, 39.49),
    "wall_68": (100, 1180, 0.37, 1140, 58.55),
    "wall_105": (41, 1290, 145.44, 1767, 377.94),
    "wall_150": (0, None, None, 2490, 821.45),
}
REFERENCE_SMALL_SETS = {
    # set: (GRASP, CPLEX, GPGP, Gurobi, Auction) completion times in seconds
    "set_1": (120, 102, 193, 111, 115),
    "set_2": (98, 103, 156, 107, 103),
    "set_3": (109, 107, 157, 119, 107),
    "set_4": (94, 102, 158, 107, 102),
    "set_5": (80, 119, 158, 132, 118),
    "set_6": (119, 105, 170, 125, 126),
    "set_7": (103, 96, 119, 107, 96),
    "set_8": (118, 102, 178, 129, 106),
    "set_9": (87, 96, 144, 119, 98),
    "set_10": (104, 87, 133, 107, 99),
}
REFERENCE_ROBOTS = {
    # wall: {R: (R_used, T')}
    "wall_18": {2: (2, 440), 4: (4, 340), 6: (5, 320), 8: (5, 320), 10: (5, 320)},
    "wall_39": {2: (2, 990), 4: (4, 580), 6: (6, 520), 8: (7, 520), 10: (7, 520)},
    "wall_68": {2: (2, 1690), 4: (4, 880), 6: (6, 700), 8: (8, 710), 10: (10, 680)},
    "wall_105": {2: (2, 2640), 4: (4, 1340), 6: (6, 950), 8: (8, 870), 10: (10, 850)},
    "wall_150": {2: (2, 3740), 4: (4, 1890), 6: (6, 1300), 8: (8, 1080), 10: (10, 1050)},
}
REFERENCE_BATTERY = {"grasp": 390, "naive": 440}


@dataclass(frozen=True)
class Task:
    suite: str
    instance: str
    planner: str
    robots: int
    seed: int
    upsilon: float = 0.1
    k_max: int = 1000
    k_max_not_improved: int = 100
    ugv: int = 0
    battery_budget: float = math.inf
    battery_swap: float = 40.0
    d_min: float = DEFAULT_D_MIN


@dataclass
class Outcome:
    task: Task
    completion_time: float
    reward: int
    progress: float
    robots_used: int
    swaps: int
    runtime_ms: float
    certified: Optional[bool] = None


@dataclass
class ReportRow:
    suite: str
    instance: str
    planner: str
    robots: int
    seeds: int
    progress: float
    reward: int
    reward_total: int
    t_mean: float
    t_std: float
    t_min: float
    t_max: float
    runtime_ms: float
    robots_used: int
    swaps_mean: float
    reference: dict = field(default_factory=dict)


@dataclass
class RunReport:
    suite: str
    rows: list[ReportRow]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in self.rows)

    def to_text(self) -> str:
        head = ["instance", "planner", "R", "seeds", "progress", "T' mean", "std", "min", "max",
                "runtime ms", "R_used", "reference"]
        body = []
        for r in self.rows:
            ref = " ".join(f"{k}={v}" for k, v in r.reference.items() if v is not None)
            body.append([r.instance, r.planner, str(r.robots), str(r.seeds), f"{r.progress:.0f}%",
                         f"{r.t_mean:.1f}", f"{r.t_std:.1f}", f"{r.t_min:g}", f"{r.t_max:g}",
                         f"{r.runtime_ms:.1f}", str(r.robots_used), ref])
        widths = [max(len(x) for x in col) for col in zip(head, *body)] if body else [len(h) for h in head]
        fmt = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
        lines = [f"suite {self.suite}", fmt(head), fmt(["-" * w for w in widths])]
        lines += [fmt(b) for b in body]
        return "\n".join(lines) + "\n"


@lru_cache(maxsize=None)
def _instance(name: str):
    return load_fixture(name)


def run_task(task: Task) -> Outcome:
    bp = _instance(task.instance)
    kw = dict(battery_budget=task.battery_budget, battery_swap_time=task.battery_swap)
    team = mixed_team(task.robots - task.ugv, task.ugv, **kw) if task.ugv else make_team(task.robots, **kw)
    graph = build_graph(bp, team, d_min=task.d_min)
    certified = None
    t0 = time.perf_counter()
    if task.planner == "grasp":
        cfg = GraspConfig(k_max=task.k_max, k_max_not_improved=task.k_max_not_improved,
                          upsilon=task.upsilon, seed=task.seed)
        plan = grasp_optimize(graph, team, cfg).plan
    elif task.planner == "naive":
        plan = naive_plan(graph, team)
    elif task.planner == "oracle":
        result = exact_oracle(graph, team)
        plan, certified = result.optimal_plan, result.certified
    else:
        raise ValueError(f"unknown planner {task.planner!r}")
    runtime = (time.perf_counter() - t0) * 1000.0
    return Outcome(task, plan.completion_time, plan.reward, plan.progress, plan.robots_used,
                   len(plan.swaps), runtime, certified)


def suite_tasks(suite: str, seeds: int, upsilon: Optional[float] = None) -> list[Task]:
    tasks = []
    seed_list = range(seeds)
    if suite == "scaling":
        ups = 0.1 if upsilon is None else upsilon
        for wall in BENCH_WALLS:
            tasks += [Task(suite, wall, "grasp", 3, s, upsilon=ups) for s in seed_list]
    elif suite == "small-sets":
        ups = 1.0 if upsilon is None else upsilon
        for name in SMALL_SETS:
            tasks += [Task(suite, name, "grasp", 3, s, upsilon=ups, ugv=1) for s in seed_list]
            tasks.append(Task(suite, name, "naive", 3, 0, ugv=1))
            tasks.append(Task(suite, name, "oracle", 3, 0, ugv=1))
    elif suite == "robots":
        ups = 0.1 if upsilon is None else upsilon
        for wall in REFERENCE_ROBOTS:
            for r in (2, 4, 6, 8, 10):
                tasks += [Task(suite, wall, "grasp", r, s, upsilon=ups) for s in seed_list]
    elif suite == "battery":
        ups = 1.0 if upsilon is None else upsilon
        tasks += [Task(suite, "wall_18", "grasp", 3, s, upsilon=ups, battery_budget=200.0) for s in seed_list]
        tasks.append(Task(suite, "wall_18", "naive", 3, 0, battery_budget=200.0))
        tasks.append(Task(suite, "wall_18", "naive", 3, 0))
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    return tasks


def _reference(task: Task) -> dict:
    if task.suite == "scaling" and task.instance in REFERENCE_SCALING:
        _prog, cplex_t, cplex_gap, grasp_t, _ms = REFERENCE_SCALING[task.instance]
        return {"published_grasp_T": grasp_t, "published_cplex_T": cplex_t, "published_cplex_gap": cplex_gap}
    if task.suite == "small-sets" and task.instance in REFERENCE_SMALL_SETS:
        names = ("published_grasp_T", "published_cplex_T", "gpgp_T", "gurobi_T", "auction_T")
        return dict(zip(names, REFERENCE_SMALL_SETS[task.instance]))
    if task.suite == "robots":
        used, t = REFERENCE_ROBOTS[task.instance][task.robots]
        return {"published_R_used": used, "published_T": t}
    if task.suite == "battery":
        key = "grasp" if task.planner == "grasp" else "naive"
        label = "battery" if math.isfinite(task.battery_budget) else "no battery"
        return {"published_T": REFERENCE_BATTERY[key], "variant": label}
    return {}


def summarize(suite: str, outcomes: list[Outcome]) -> RunReport:
    groups: dict[tuple, list[Outcome]] = {}
    for o in outcomes:
        t = o.task
        key = (t.instance, t.planner, t.robots, t.battery_budget)
        groups.setdefault(key, []).append(o)
    rows = []
    for (instance, planner, robots, _b), group in groups.items():
        times = [o.completion_time for o in group]
        total = wall_reward_total(_instance(instance))
        rows.append(ReportRow(
            suite=suite, instance=instance, planner=planner, robots=robots, seeds=len(group),
            progress=statistics.mean(o.progress for o in group),
            reward=min(o.reward for o in group), reward_total=total,
            t_mean=statistics.mean(times), t_std=statistics.pstdev(times), t_min=min(times), t_max=max(times),
            runtime_ms=statistics.mean(o.runtime_ms for o in group),
            robots_used=max(o.robots_used for o in group),
            swaps_mean=statistics.mean(o.swaps for o in group),
            reference=_reference(group[0].task),
        ))
    return RunReport(suite, rows)


def run_suite(suite: str, seeds: int = 30, workers: int = 1, upsilon: Optional[float] = None) -> RunReport:
    """Run a suite. Seeds fan out over a process pool; results are merged in task order."""
    tasks = suite_tasks(suite, seeds, upsilon)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_task, tasks, chunksize=1))
    else:
        outcomes = [run_task(t) for t in tasks]
    return summarize(suite, outcomes)
