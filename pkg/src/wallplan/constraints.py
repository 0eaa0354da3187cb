"""Precedence and concurrence rules, and the planning graph built from them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

from .errors import ConfigurationError, InfeasibleError
from .wall import Brick, WallBlueprint

_AREA_EPS = 1e-12
_DIST_EPS = 1e-9

DEFAULT_D_MIN = 0.8  # meters


@dataclass(frozen=True, order=True)
class PrecedenceRule:
    below: int
    above: int


@dataclass(frozen=True, order=True)
class ConcurrenceRule:
    a: int
    b: int

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("a concurrence rule needs two distinct bricks")
        if self.a > self.b:  # canonical unordered pair
            lo, hi = self.b, self.a
            object.__setattr__(self, "a", lo)
            object.__setattr__(self, "b", hi)


def _footprint(bp: WallBlueprint, b: Brick) -> tuple[float, float, float, float]:
    """Axis-aligned xy box of a brick's footprint (xmin, xmax, ymin, ymax)."""
    half_l = bp.dims.length_of(b.kind) / 2
    half_w = bp.dims.width / 2
    c, s = abs(math.cos(b.yaw)), abs(math.sin(b.yaw))
    ex = half_l * c + half_w * s
    ey = half_l * s + half_w * c
    x, y = b.center[0], b.center[1]
    return x - ex, x + ex, y - ey, y + ey


def _overlap_area(p, q) -> float:
    dx = min(p[1], q[1]) - max(p[0], q[0])
    dy = min(p[3], q[3]) - max(p[2], q[2])
    return dx * dy if dx > 0 and dy > 0 else 0.0


def build_precedence(bp: WallBlueprint) -> set[PrecedenceRule]:
    """Brick `above` depends on `below` when it sits one layer higher and their footprints overlap."""
    by_layer: dict[int, list[Brick]] = {}
    for b in bp.bricks:
        by_layer.setdefault(bp.layer_of(b), []).append(b)
    boxes = {b.id: _footprint(bp, b) for b in bp.bricks}
    rules = set()
    for layer, upper in by_layer.items():
        for a in upper:
            for b in by_layer.get(layer - 1, ()):
                if _overlap_area(boxes[a.id], boxes[b.id]) > _AREA_EPS:
                    rules.add(PrecedenceRule(below=b.id, above=a.id))
    return rules


def center_distance(a: Brick, b: Brick) -> float:
    return math.dist(a.center, b.center)


def resolve_d_min(bp: WallBlueprint, d_place: Optional[float] = None, d_min: Optional[float] = None) -> float:
    """d_min given directly, or d_place times the smallest center distance between any two bricks."""
    if d_min is not None:
        if d_place is not None:
            raise ConfigurationError("give either d_place or d_min, not both")
        if d_min < 0:
            raise ConfigurationError("d_min must be non-negative")
        return float(d_min)
    if d_place is None:
        raise ConfigurationError("one of d_place or d_min is required")
    if d_place < 1:
        raise ConfigurationError(f"d_place must be at least 1, got {d_place}")
    if len(bp.bricks) < 2:
        return 0.0
    closest = min(center_distance(a, b) for a, b in combinations(bp.bricks, 2))
    return d_place * closest


def build_concurrence(
    bp: WallBlueprint, d_place: Optional[float] = None, d_min: Optional[float] = None
) -> set[ConcurrenceRule]:
    if len(bp.bricks) < 2:
        return set()
    limit = resolve_d_min(bp, d_place, d_min)
    return {
        ConcurrenceRule(a.id, b.id)
        for a, b in combinations(bp.bricks, 2)
        if center_distance(a, b) <= limit + _DIST_EPS
    }


@dataclass(frozen=True)
class ConstraintGraph:
    """Bricks plus one virtual start node per robot and a single end node.

    Node numbering: brick nodes keep their brick ids, start nodes follow
    as max_brick_id+1 .. max_brick_id+R and the end node comes last.
    """

    blueprint: WallBlueprint
    n_robots: int
    precedence: frozenset[PrecedenceRule]
    concurrence: frozenset[ConcurrenceRule]
    d_min: float
    brick_ids: tuple[int, ...] = field(init=False)
    predecessors: dict[int, tuple[int, ...]] = field(init=False, repr=False)
    successors: dict[int, tuple[int, ...]] = field(init=False, repr=False)
    partners: dict[int, tuple[int, ...]] = field(init=False, repr=False)

    def __post_init__(self):
        ids = tuple(b.id for b in self.blueprint.bricks)
        preds = {i: [] for i in ids}
        succs = {i: [] for i in ids}
        partners = {i: [] for i in ids}
        for r in self.precedence:
            preds[r.above].append(r.below)
            succs[r.below].append(r.above)
        for r in self.concurrence:
            partners[r.a].append(r.b)
            partners[r.b].append(r.a)
        freeze = lambda d: {k: tuple(sorted(v)) for k, v in d.items()}
        object.__setattr__(self, "brick_ids", ids)
        object.__setattr__(self, "predecessors", freeze(preds))
        object.__setattr__(self, "successors", freeze(succs))
        object.__setattr__(self, "partners", freeze(partners))

    @property
    def n_bricks(self) -> int:
        return len(self.brick_ids)

    @property
    def node_count(self) -> int:
        return self.n_bricks + self.n_robots + 1

    @property
    def start_nodes(self) -> tuple[int, ...]:
        base = max(self.brick_ids, default=0)
        return tuple(base + 1 + r for r in range(self.n_robots))

    @property
    def end_node(self) -> int:
        return max(self.brick_ids, default=0) + self.n_robots + 1

    @property
    def entry_bricks(self) -> tuple[int, ...]:
        """Bricks with no precedence rule; the start nodes connect to these."""
        return tuple(i for i in self.brick_ids if not self.predecessors[i])

    @property
    def exit_bricks(self) -> tuple[int, ...]:
        """Bricks nothing rests on; a plan may finish with any of them."""
        return tuple(i for i in self.brick_ids if not self.successors[i])

    def topological_order(self) -> list[int]:
        order, indeg = [], {i: len(self.predecessors[i]) for i in self.brick_ids}
        ready = sorted(i for i, d in indeg.items() if d == 0)
        while ready:
            i = ready.pop(0)
            order.append(i)
            for j in self.successors[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    ready.append(j)
            ready.sort()
        if len(order) != self.n_bricks:
            raise InfeasibleError("precedence rules contain a cycle")
        return order

    def travel_time(self, i: int, j: int, return_time: float = 0.0) -> float:
        """|e_ij|: the return leg between two bricks, zero on edges touching a virtual node."""
        if i in self.predecessors and j in self.predecessors:
            return return_time
        return 0.0

    def dump_edges(self) -> str:
        lines = [f"P {r.below} {r.above}" for r in sorted(self.precedence)]
        lines += [f"C {r.a} {r.b}" for r in sorted(self.concurrence)]
        return "\n".join(lines) + ("\n" if lines else "")


def unsupported_bricks(bp: WallBlueprint, precedence) -> list[int]:
    """Bricks above the ground layer that nothing supports."""
    supported = {r.above for r in precedence}
    return [b.id for b in bp.bricks if bp.layer_of(b) > 0 and b.id not in supported]


def unsupported_placed(bp: WallBlueprint, precedence) -> list[int]:
    """Pre-placed bricks resting on a brick that is not placed yet."""
    placed = {b.id for b in bp.bricks if b.placed}
    return sorted({r.above for r in precedence if r.above in placed and r.below not in placed})


def build_graph(
    bp: WallBlueprint,
    robots: int | Sequence,
    d_place: Optional[float] = None,
    d_min: Optional[float] = None,
) -> ConstraintGraph:
    """Assemble the planning graph. `robots` is a robot count or a list of robots."""
    n_robots = robots if isinstance(robots, int) else len(robots)
    if n_robots < 1:
        raise ConfigurationError("at least one robot is required")
    if d_place is None and d_min is None:
        d_min = DEFAULT_D_MIN
    precedence = build_precedence(bp)
    floating = unsupported_bricks(bp, precedence)
    if floating:
        raise InfeasibleError(f"bricks without support can never be placed: {floating}", floating)
    limit = resolve_d_min(bp, d_place, d_min)
    concurrence = build_concurrence(bp, d_min=limit)
    graph = ConstraintGraph(bp, n_robots, frozenset(precedence), frozenset(concurrence), limit)
    graph.topological_order()
    return graph
