"""Shipped wall fixtures.

The benchmark walls are reconstructions: square stretcher-bond walls n full
bricks long and n layers high for n = 2, 4, ..., 12, which gives the
5/18/39/68/105/150 brick counts of the benchmark walls. The ten small sets
are 7-10 brick walls of different shapes for a 2 UAV + 1 UGV team.
"""
from __future__ import annotations

import os
from pathlib import Path

from .wall import BrickDimensions, WallBlueprint, generate_wall, load_wall

FIXTURE_ENV = "WALLPLAN_FIXTURES"

BENCH_WALLS = {
    "wall_5": 2,
    "wall_18": 4,
    "wall_39": 6,
    "wall_68": 8,
    "wall_105": 10,
    "wall_150": 12,
}

# (length in half bricks, layers) for the ten small sets, 7-10 bricks each
SMALL_SETS = {
    "set_1": (6, 2),
    "set_2": (7, 2),
    "set_3": (8, 2),
    "set_4": (9, 2),
    "set_5": (4, 3),
    "set_6": (5, 3),
    "set_7": (3, 4),
    "set_8": (3, 5),
    "set_9": (2, 5),
    "set_10": (4, 4),
}


def fixture_dir() -> Path:
    override = os.environ.get(FIXTURE_ENV)
    if override:
        return Path(override)
    return Path(__file__).parent / "fixtures"


def fixture_names() -> list[str]:
    return list(BENCH_WALLS) + list(SMALL_SETS)


def build_fixture(name: str, dims: BrickDimensions | None = None) -> WallBlueprint:
    """Regenerate a fixture from its recipe."""
    dims = dims or BrickDimensions()
    if name in BENCH_WALLS:
        n = BENCH_WALLS[name]
        return generate_wall(n * dims.full_length, n * dims.height, dims)
    if name in SMALL_SETS:
        halves, layers = SMALL_SETS[name]
        return generate_wall(halves * dims.half_length, layers * dims.height, dims)
    raise KeyError(f"unknown fixture {name!r}")


def load_fixture(name: str) -> WallBlueprint:
    path = fixture_dir() / f"{name}.json"
    return load_wall(path)
