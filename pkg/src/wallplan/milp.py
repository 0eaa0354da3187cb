"""Export of the team-orienteering MILP as an LP text file, plus helpers to check
schedules against the exported rows and to decode solver output into a Plan."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .constraints import ConstraintGraph
from .engine import Placement, Plan, Robot
from .errors import ExportError

_TERMS_PER_LINE = 8


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str  # "binary" or "continuous"
    lb: float = 0.0
    ub: float = 1.0


@dataclass
class Row:
    name: str
    terms: dict[str, float]
    sense: str  # "<=", ">=" or "="
    rhs: float
    eq: int  # which model equation the row encodes

    def activity(self, values: Mapping[str, float]) -> float:
        return sum(c * values.get(v, 0.0) for v, c in self.terms.items())

    def satisfied(self, values: Mapping[str, float], tol: float = 1e-6) -> bool:
        lhs = self.activity(values)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        if self.sense == ">=":
            return lhs >= self.rhs - tol
        return abs(lhs - self.rhs) <= tol


@dataclass
class MilpModel:
    variables: dict[str, Variable]
    objective: dict[str, float]
    rows: list[Row]
    M: float
    T_max: float
    W: float
    nodes: dict = field(default_factory=dict)
    edges: list[tuple[int, int]] = field(default_factory=list)

    def count(self, prefix: str) -> int:
        return sum(1 for v in self.variables if v.startswith(prefix))

    def objective_value(self, values: Mapping[str, float]) -> float:
        return sum(c * values.get(v, 0.0) for v, c in self.objective.items())

    def violations(self, values: Mapping[str, float], tol: float = 1e-6) -> list[str]:
        """Rows, bounds and integrality requirements broken by `values`."""
        out = [f"{row.name} (eq {row.eq})" for row in self.rows if not row.satisfied(values, tol)]
        for var in self.variables.values():
            v = values.get(var.name, 0.0)
            if v < var.lb - tol or v > var.ub + tol:
                out.append(f"bound {var.name}={v}")
            if var.kind == "binary" and abs(v - round(v)) > tol:
                out.append(f"integrality {var.name}={v}")
        return out

    def sidecar(self) -> dict:
        return {
            "T_max": self.T_max,
            "W": self.W,
            "M": self.M,
            "nodes": self.nodes,
            "variables": {name: _describe(name) for name in self.variables},
        }


def _describe(name: str) -> dict:
    parts = name.split("_")
    if parts[0] == "x":
        return {"type": "x", "robot": int(parts[1][1:]), "i": int(parts[2][1:]), "j": int(parts[3][1:])}
    if parts[0] in ("z", "d"):
        return {"type": parts[0], "i": int(parts[1]), "j": int(parts[2])}
    return {"type": parts[0], "node": int(parts[1])}


def _xname(rid: int, i: int, j: int) -> str:
    return f"x_r{rid}_i{i}_j{j}"


def build_milp(
    graph: ConstraintGraph,
    robots: Sequence[Robot],
    t_max: float,
    weight: str = "inverse",
    restrict_virtual_edges: bool = False,
) -> MilpModel:
    """Build the model: maximize collected reward minus W times the end-node visit time.

    weight="inverse" uses W = 1/T_max so the time term stays within [0, 1];
    weight="literal" uses W = T_max. Brick-to-brick edges carry the robots'
    return leg as |e_ij|; edges touching a virtual node carry none. Robots
    must share timing parameters because node durations are robot-independent.
    """
    if t_max is None or not math.isfinite(t_max) or t_max <= 0:
        raise ExportError("the MILP needs a finite positive T_max for its big-M constant; pass --tmax")
    if weight not in ("inverse", "literal"):
        raise ExportError(f"unknown objective weight mode {weight!r}")
    if len(robots) != graph.n_robots:
        raise ExportError("robot list does not match the graph's start nodes")
    penalties = {r.speed_penalty for r in robots}
    returns = {r.return_time for r in robots}
    if len(penalties) > 1 or len(returns) > 1:
        raise ExportError("the MILP assumes identical robots; mixed speed penalties or return times are not expressible")
    penalty, ret = penalties.pop(), returns.pop()
    if any(b.placed for b in graph.blueprint.bricks):
        raise ExportError("pre-placed bricks are not part of the model; export the remaining wall instead")

    bp = graph.blueprint
    bricks = list(graph.brick_ids)
    starts = list(graph.start_nodes)
    end = graph.end_node
    nodes = bricks + starts + [end]
    dur = {b.id: b.duration_s + penalty for b in bp.bricks}
    dur.update({s: 0.0 for s in starts})
    dur[end] = 0.0
    reward = {b.id: b.reward for b in bp.bricks}

    entry = graph.entry_bricks if restrict_virtual_edges else bricks
    exits = graph.exit_bricks if restrict_virtual_edges else bricks
    edges = []
    for s in starts:
        edges += [(s, b) for b in entry] + [(s, end)]
    edges += [(a, b) for a in bricks for b in bricks if a != b]
    edges += [(b, end) for b in exits]
    travel = {e: (ret if e[0] in reward and e[1] in reward else 0.0) for e in edges}

    M = t_max + max(dur.values()) + max(travel.values(), default=0.0)
    W = 1.0 / t_max if weight == "inverse" else t_max
    rids = [r.id for r in robots]

    variables: dict[str, Variable] = {}
    for rid in rids:
        for i, j in edges:
            variables[_xname(rid, i, j)] = Variable(_xname(rid, i, j), "binary")
    for i, j in edges:
        variables[f"z_{i}_{j}"] = Variable(f"z_{i}_{j}", "binary")
    for v in nodes:
        variables[f"y_{v}"] = Variable(f"y_{v}", "binary")
    for v in nodes:
        variables[f"s_{v}"] = Variable(f"s_{v}", "continuous", 0.0, t_max)
    conc = sorted((r.a, r.b) for r in graph.concurrence)
    for a, b in conc:
        variables[f"d_{a}_{b}"] = Variable(f"d_{a}_{b}", "binary")

    objective = {f"y_{b}": float(reward[b]) for b in bricks}
    objective[f"s_{end}"] = -W

    out_of = {v: [] for v in nodes}
    into = {v: [] for v in nodes}
    for i, j in edges:
        out_of[i].append(j)
        into[j].append(i)

    rows: list[Row] = []
    for rid, s in zip(rids, starts):
        rows.append(Row(f"start_r{rid}", {_xname(rid, s, j): 1.0 for j in out_of[s]}, "=", 1.0, 2))
    rows.append(Row("end", {_xname(rid, i, end): 1.0 for rid in rids for i in into[end]}, "=", float(len(rids)), 3))
    for s in starts:
        rows.append(Row(f"start_time_{s}", {f"s_{s}": 1.0}, "=", 0.0, 4))
        rows.append(Row(f"start_visit_{s}", {f"y_{s}": 1.0}, "=", 1.0, 5))
    rows.append(Row("end_visit", {f"y_{end}": 1.0}, "=", 1.0, 6))
    for rid in rids:
        for c in bricks:
            terms = {_xname(rid, i, c): 1.0 for i in into[c]}
            for j in out_of[c]:
                terms[_xname(rid, c, j)] = -1.0
            rows.append(Row(f"flow_r{rid}_{c}", terms, "=", 0.0, 7))
    for c in bricks + starts:
        terms = {_xname(rid, c, j): 1.0 for rid in rids for j in out_of[c]}
        terms[f"y_{c}"] = -1.0
        rows.append(Row(f"visit_{c}", terms, "=", 0.0, 8))
    for i, j in edges:
        terms = {_xname(rid, i, j): 1.0 for rid in rids}
        terms[f"z_{i}_{j}"] = -float(len(rids))
        rows.append(Row(f"couple_{i}_{j}", terms, "<=", 0.0, 9))
    for i, j in edges:
        # s_i + t_i + |e_ij| <= s_j + M (1 - z_ij)
        terms = {f"s_{i}": 1.0, f"s_{j}": -1.0, f"z_{i}_{j}": M}
        rows.append(Row(f"time_{i}_{j}", terms, "<=", M - dur[i] - travel[(i, j)], 10))
    for rule in sorted(graph.precedence):
        a, b = rule.above, rule.below
        rows.append(Row(f"prec_visit_{b}_{a}", {f"y_{b}": 1.0, f"y_{a}": -1.0}, ">=", 0.0, 11))
        rows.append(Row(f"prec_time_{b}_{a}", {f"s_{a}": 1.0, f"s_{b}": -1.0, f"y_{b}": -dur[b]}, ">=", 0.0, 12))
    for a, b in conc:
        # delta = 0 selects "b after a", delta = 1 selects "a after b"
        rows.append(Row(f"conc_ab_{a}_{b}", {f"s_{b}": 1.0, f"s_{a}": -1.0, f"y_{a}": -dur[a], f"d_{a}_{b}": M},
                        ">=", 0.0, 13))
        rows.append(Row(f"conc_ba_{a}_{b}", {f"s_{a}": 1.0, f"s_{b}": -1.0, f"y_{b}": -dur[b], f"d_{a}_{b}": -M},
                        ">=", -M, 13))

    node_info = {
        "bricks": bricks,
        "start_nodes": {str(rid): s for rid, s in zip(rids, starts)},
        "end_node": end,
        "durations": {str(k): v for k, v in dur.items()},
        "return_time": ret,
    }
    return MilpModel(variables, objective, rows, M, float(t_max), W, node_info, edges)


# ---------------------------------------------------------------- LP text output

def _num(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return format(x, ".12g")


def _expr(terms: Mapping[str, float]) -> str:
    parts = []
    for k, (name, coef) in enumerate(terms.items()):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = name if mag == 1 else f"{_num(mag)} {name}"
        if k == 0:
            parts.append(f"- {body}" if sign == "-" else body)
        else:
            parts.append(f"{sign} {body}")
    lines = [" ".join(parts[i:i + _TERMS_PER_LINE]) for i in range(0, len(parts), _TERMS_PER_LINE)]
    return "\n   ".join(lines) if lines else "0 y_dummy"


def lp_text(model: MilpModel) -> str:
    out = ["\\ team orienteering model for multi-robot wall construction",
           f"\\ T_max = {_num(model.T_max)}  W = {_num(model.W)}  M = {_num(model.M)}",
           "Maximize", f" obj: {_expr(model.objective)}", "Subject To"]
    sense = {"<=": "<=", ">=": ">=", "=": "="}
    for row in model.rows:
        out.append(f" {row.name}: {_expr(row.terms)} {sense[row.sense]} {_num(row.rhs)}")
    out.append("Bounds")
    for v in model.variables.values():
        if v.kind == "continuous":
            out.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    out.append("Binaries")
    names = [v.name for v in model.variables.values() if v.kind == "binary"]
    for i in range(0, len(names), _TERMS_PER_LINE):
        out.append(" " + " ".join(names[i:i + _TERMS_PER_LINE]))
    out.append("End")
    return "\n".join(out) + "\n"


def write_lp(model: MilpModel, path, sidecar_path=None) -> None:
    """Write the LP file and, next to it, a JSON map from variable names to node and robot ids."""
    path = Path(path)
    path.write_text(lp_text(model))
    sidecar_path = Path(sidecar_path) if sidecar_path else path.with_suffix(path.suffix + ".json")
    sidecar_path.write_text(json.dumps(model.sidecar(), indent=1, sort_keys=True) + "\n")


# ---------------------------------------------------------------- schedules <-> variables

def plan_to_values(plan: Plan, model: MilpModel, robots: Sequence[Robot]) -> dict[str, float]:
    """Variable assignment that encodes an engine plan (routes, visits and start times)."""
    nodes = model.nodes
    end = nodes["end_node"]
    values = {name: 0.0 for name in model.variables}
    for rid_s, s in nodes["start_nodes"].items():
        values[f"y_{s}"] = 1.0
    values[f"y_{end}"] = 1.0
    last_placed = 0.0
    for robot in robots:
        route = [nodes["start_nodes"][str(robot.id)]]
        route += [p.brick for p in plan.placements if p.robot == robot.id]
        route.append(end)
        for i, j in zip(route, route[1:]):
            values[_xname(robot.id, i, j)] = 1.0
            values[f"z_{i}_{j}"] = 1.0
    for p in plan.placements:
        values[f"y_{p.brick}"] = 1.0
        values[f"s_{p.brick}"] = p.start
        last_placed = max(last_placed, p.placed_at)
    values[f"s_{end}"] = last_placed
    # unvisited bricks: any time consistent with the precedence rows
    dur = {int(k): v for k, v in nodes["durations"].items()}
    for b in nodes["bricks"]:
        if values[f"y_{b}"] == 0.0:
            values[f"s_{b}"] = min(model.T_max, last_placed)
    for name in model.variables:
        if name.startswith("d_"):
            _, a, b = name.split("_")
            sa, sb = values[f"s_{a}"], values[f"s_{b}"]
            # delta = 0 needs s_b >= s_a + y_a t_a
            values[name] = 0.0 if sb >= sa + values[f"y_{a}"] * dur[int(a)] - 1e-9 else 1.0
    return values


def decode_solution(values: Mapping[str, float], model: MilpModel, robots: Sequence[Robot],
                    graph: ConstraintGraph) -> Plan:
    """Turn solver output (variable name -> value) back into a Plan."""
    nodes = model.nodes
    end = nodes["end_node"]
    dur = {int(k): v for k, v in nodes["durations"].items()}
    ret = nodes["return_time"]
    succ = {}
    for name, v in values.items():
        if name.startswith("x_") and v > 0.5:
            d = _describe(name)
            succ[(d["robot"], d["i"])] = d["j"]
    placements = []
    for robot in robots:
        node = nodes["start_nodes"][str(robot.id)]
        seen = set()
        while (robot.id, node) in succ and node not in seen:
            seen.add(node)
            node = succ[(robot.id, node)]
            if node == end:
                break
            start = float(values.get(f"s_{node}", 0.0))
            placements.append(Placement(start, robot.id, node, start + dur[node], start + dur[node] + ret))
    rewards = {b.id: b.reward for b in graph.blueprint.bricks}
    return Plan(
        placements=tuple(sorted(placements)),
        robot_ids=tuple(r.id for r in robots),
        reward=sum(rewards[p.brick] for p in placements),
        completion_time=max((p.placed_at for p in placements), default=0.0),
        total_bricks=graph.n_bricks,
        preplaced=tuple(b.id for b in graph.blueprint.bricks if b.placed),
    )
