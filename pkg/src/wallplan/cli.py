"""Command-line front end.

Exit codes: 0 success, 2 usage or invalid parameters, 3 infeasible instance, 4 I/O or file format.
"""
from __future__ import annotations

import argparse
import math
import secrets
import sys
import time
from pathlib import Path

from . import bench
from .baselines import exact_oracle, naive_plan
from .constraints import DEFAULT_D_MIN, build_graph
from .datasets import fixture_dir, fixture_names, load_fixture
from .engine import Plan, make_team, mixed_team, validate_plan
from .errors import InfeasibleError, WallFormatError, WallPlanError
from .gantt import render_gantt
from .grasp import GraspConfig, grasp_optimize
from .milp import build_milp, write_lp
from .wall import BrickDimensions, generate_wall, load_wall, save_wall

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4


class _IOFailure(Exception):
    pass


def _dims(text: str) -> BrickDimensions:
    try:
        full, width, height = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected FULL_LENGTH,WIDTH,HEIGHT in meters") from None
    return BrickDimensions(full, width, height)


def _load(spec: str):
    path = Path(spec)
    if path.exists():
        return load_wall(path)
    if spec in fixture_names():
        return load_fixture(spec)
    raise _IOFailure(f"no wall file or fixture named {spec!r} (fixtures live in {fixture_dir()})")


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _team(args):
    kw = dict(battery_budget=args.battery_budget if args.battery_budget else math.inf,
              battery_swap_time=args.battery_swap)
    if args.ugv:
        if args.ugv > args.robots:
            raise argparse.ArgumentTypeError("--ugv cannot exceed --robots")
        return mixed_team(args.robots - args.ugv, args.ugv, **kw)
    return make_team(args.robots, **kw)


def cmd_generate(args) -> int:
    bp = generate_wall(args.length, args.height, args.dims)
    save_wall(bp, args.out)
    if args.out != "-":
        print(f"wrote {len(bp)} bricks to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_plan(args) -> int:
    bp = _load(args.wall)
    robots = _team(args)
    graph = build_graph(bp, robots, d_min=args.dmin)
    t_max = args.tmax if args.tmax else math.inf
    seed = args.seed
    t0 = time.perf_counter()
    if args.planner == "grasp":
        if seed is None:
            seed = secrets.randbits(32)
            print(f"seed: {seed}", file=sys.stderr)
        cfg = GraspConfig(k_max=args.kmax, k_max_not_improved=args.kmax_not_improved,
                          upsilon=args.upsilon, seed=seed, t_max=t_max)
        plan = grasp_optimize(graph, robots, cfg).plan
    elif args.planner == "naive":
        plan = naive_plan(graph, robots, t_max)
    else:
        result = exact_oracle(graph, robots, limit=args.oracle_limit)
        if result.optimal_plan is None:
            print("oracle found no complete plan within its state budget", file=sys.stderr)
            return EXIT_INFEASIBLE
        plan = result.optimal_plan
        if not result.certified:
            print(f"oracle budget exhausted after {result.states_explored} states; plan not certified optimal",
                  file=sys.stderr)
    runtime = (time.perf_counter() - t0) * 1000.0
    problems = validate_plan(plan, graph, robots, t_max)
    if problems:  # should never happen; report rather than hide
        print("plan failed validation:\n  " + "\n  ".join(problems), file=sys.stderr)
    if args.out:
        _write(plan.to_json() + "\n", args.out)
    if args.gantt:
        fmt = args.gantt_format or ("svg" if args.gantt.endswith(".svg") else "text")
        _write(render_gantt(plan, fmt, title=f"{args.planner} plan"), args.gantt)
    print(f"planner={args.planner} robots={len(robots)} T'={plan.completion_time:g}s reward={plan.reward} "
          f"progress={plan.progress:.0f}% robots_used={plan.robots_used} swaps={len(plan.swaps)} "
          f"runtime_ms={runtime:.1f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    report = bench.run_suite(args.suite, seeds=args.seeds, workers=args.workers, upsilon=args.upsilon)
    print(report.to_text(), end="")
    if args.out:
        _write(report.to_jsonl(), args.out)
    return EXIT_OK


def cmd_export_milp(args) -> int:
    bp = _load(args.wall)
    robots = make_team(args.robots)
    graph = build_graph(bp, robots, d_min=args.dmin)
    model = build_milp(graph, robots, args.tmax, weight=args.weight,
                       restrict_virtual_edges=args.restrict_virtual_edges)
    write_lp(model, args.out)
    print(f"wrote {len(model.variables)} variables and {len(model.rows)} rows to {args.out} "
          f"(variable map in {args.out}.json)", file=sys.stderr)
    return EXIT_OK


def cmd_gantt(args) -> int:
    plan = Plan.from_json(Path(args.plan).read_text())
    _write(render_gantt(plan, args.format), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wallplan", description="Multi-robot brick wall construction planner")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a stretcher-bond wall blueprint")
    g.add_argument("--length", type=float, required=True, help="wall length in meters")
    g.add_argument("--height", type=float, required=True, help="wall height in meters")
    g.add_argument("--dims", type=_dims, default=BrickDimensions(), help="FULL_LENGTH,WIDTH,HEIGHT (default 0.6,0.3,0.2)")
    g.add_argument("--out", default="-", help="output path or - for stdout")
    g.set_defaults(func=cmd_generate)

    pl = sub.add_parser("plan", help="plan the construction of a wall")
    pl.add_argument("--wall", required=True, help="wall JSON file or fixture name")
    pl.add_argument("--robots", type=int, default=3)
    pl.add_argument("--ugv", type=int, default=0, help="how many of the robots are slower ground vehicles")
    pl.add_argument("--seed", type=int, default=None)
    pl.add_argument("--upsilon", type=float, default=0.1)
    pl.add_argument("--kmax", type=int, default=1000)
    pl.add_argument("--kmax-not-improved", type=int, default=100)
    pl.add_argument("--tmax", type=float, default=None, help="time horizon in seconds (default unbounded)")
    pl.add_argument("--battery-budget", type=float, default=None, help="duty seconds between battery swaps")
    pl.add_argument("--battery-swap", type=float, default=40.0)
    pl.add_argument("--dmin", type=float, default=DEFAULT_D_MIN, help="concurrence distance in meters")
    pl.add_argument("--planner", choices=("grasp", "naive", "oracle"), default="grasp")
    pl.add_argument("--oracle-limit", type=int, default=2_000_000)
    pl.add_argument("--out", default=None, help="plan JSON path or - for stdout")
    pl.add_argument("--gantt", default=None, help="Gantt chart path (.svg for SVG, otherwise text) or -")
    pl.add_argument("--gantt-format", choices=("svg", "text"), default=None)
    pl.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="run a benchmark suite over the shipped fixtures")
    b.add_argument("--suite", choices=bench.SUITES, required=True)
    b.add_argument("--seeds", type=int, default=30)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--upsilon", type=float, default=None)
    b.add_argument("--out", default=None, help="JSON lines report path")
    b.set_defaults(func=cmd_bench)

    e = sub.add_parser("export-milp", help="write the planning MILP as an LP file")
    e.add_argument("--wall", required=True)
    e.add_argument("--robots", type=int, default=3)
    e.add_argument("--tmax", type=float, required=True)
    e.add_argument("--dmin", type=float, default=DEFAULT_D_MIN)
    e.add_argument("--weight", choices=("inverse", "literal"), default="inverse",
                   help="time weight W: 1/T_max (inverse) or T_max (literal)")
    e.add_argument("--restrict-virtual-edges", action="store_true",
                   help="connect start/end nodes only to entry/exit bricks")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export_milp)

    gt = sub.add_parser("gantt", help="render a saved plan as a Gantt chart")
    gt.add_argument("--plan", required=True)
    gt.add_argument("--format", choices=("svg", "text"), default="text")
    gt.add_argument("--out", default="-")
    gt.set_defaults(func=cmd_gantt)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, WallFormatError, _IOFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (WallPlanError, argparse.ArgumentTypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
