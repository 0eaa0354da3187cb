"""Bricks, wall blueprints and stretcher-bond generation."""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional

from .errors import DimensionError, UnsupportedBondError, WallFormatError

_EPS = 1e-9

DEFAULT_DURATION_S = 40.0


class BrickKind(enum.Enum):
    FULL = "full"
    HALF = "half"

    @property
    def default_reward(self) -> int:
        return 2 if self is BrickKind.FULL else 1


@dataclass(frozen=True)
class BrickDimensions:
    """Physical brick sizes in meters. Half bricks are half a full brick long."""

    full_length: float = 0.6
    width: float = 0.3
    height: float = 0.2

    def __post_init__(self):
        for name in ("full_length", "width", "height"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise DimensionError(f"{name} must be a positive finite length, got {value!r}")

    @property
    def half_length(self) -> float:
        return self.full_length / 2

    def length_of(self, kind: BrickKind) -> float:
        return self.full_length if kind is BrickKind.FULL else self.half_length


@dataclass(frozen=True)
class Brick:
    id: int
    kind: BrickKind
    center: tuple[float, float, float]  # z is the bottom face
    yaw: float = 0.0
    reward: int = 2
    duration_s: float = DEFAULT_DURATION_S
    placed: bool = False
    robots_required: int = 1  # never above 1 in practice, kept for the assignment rule

    @property
    def x(self) -> float:
        return self.center[0]

    @property
    def z(self) -> float:
        return self.center[2]


@dataclass(frozen=True)
class WallBlueprint:
    bricks: tuple[Brick, ...]
    dims: BrickDimensions = field(default_factory=BrickDimensions)
    length: float = 0.0
    height: float = 0.0

    def __post_init__(self):
        ids = [b.id for b in self.bricks]
        if len(set(ids)) != len(ids):
            raise WallFormatError("brick ids must be unique")

    def __len__(self) -> int:
        return len(self.bricks)

    def layer_of(self, brick: Brick) -> int:
        return int(round(brick.z / self.dims.height))

    @property
    def layers(self) -> list[list[int]]:
        """Brick ids grouped by layer index, each layer sorted by x."""
        by_layer: dict[int, list[Brick]] = {}
        for b in self.bricks:
            by_layer.setdefault(self.layer_of(b), []).append(b)
        if not by_layer:
            return []
        out = []
        for i in range(max(by_layer) + 1):
            out.append([b.id for b in sorted(by_layer.get(i, []), key=lambda b: b.x)])
        return out

    def brick(self, brick_id: int) -> Brick:
        for b in self.bricks:
            if b.id == brick_id:
                return b
        raise KeyError(brick_id)

    def with_placed(self, placed_ids: Iterable[int]) -> "WallBlueprint":
        placed = set(placed_ids)
        return replace(self, bricks=tuple(replace(b, placed=b.id in placed) for b in self.bricks))


def _layer_kinds(n_half: int, layer: int) -> list[BrickKind]:
    # Even layers: F^n or F^n H.  Odd layers: H F^n H or H F^n.
    F, H = BrickKind.FULL, BrickKind.HALF
    if layer % 2 == 0:
        kinds = [F] * (n_half // 2)
        if n_half % 2:
            kinds.append(H)
        return kinds
    rest = n_half - 1
    kinds = [H] + [F] * (rest // 2)
    if rest % 2:
        kinds.append(H)
    return kinds


def _as_multiple(value: float, unit: float, what: str) -> int:
    if not (value > 0 and math.isfinite(value)):
        raise DimensionError(f"{what} must be positive, got {value!r}")
    n = round(value / unit)
    if n < 1 or abs(n * unit - value) > 1e-6 * max(1.0, value):
        raise DimensionError(f"{what} {value!r} m is not a whole multiple of {unit!r} m")
    return int(n)


def generate_wall(
    length: float,
    height: float,
    dims: Optional[BrickDimensions] = None,
    bond: str = "stretcher",
    duration_s: float = DEFAULT_DURATION_S,
) -> WallBlueprint:
    """Tile a straight wall in stretcher running bond.

    Bricks are numbered from 1, left to right within a layer and layers
    bottom to top.
    """
    dims = dims or BrickDimensions()
    if bond not in ("stretcher", "stretcher-running", "running"):
        raise UnsupportedBondError(f"unsupported bond {bond!r}; only stretcher running bond is implemented")
    n_half = _as_multiple(length, dims.half_length, "wall length")
    n_layers = _as_multiple(height, dims.height, "wall height")

    bricks = []
    next_id = 1
    for layer in range(n_layers):
        x = 0.0
        for kind in _layer_kinds(n_half, layer):
            size = dims.length_of(kind)
            bricks.append(Brick(
                id=next_id,
                kind=kind,
                center=(x + size / 2, 0.0, layer * dims.height),
                reward=kind.default_reward,
                duration_s=duration_s,
            ))
            next_id += 1
            x += size
    return WallBlueprint(bricks=tuple(bricks), dims=dims, length=n_half * dims.half_length,
                         height=n_layers * dims.height)


def wall_reward_total(blueprint: WallBlueprint) -> int:
    return sum(b.reward for b in blueprint.bricks)


def check_blueprint(bp: WallBlueprint) -> list[str]:
    """Return a list of broken blueprint invariants (empty when the wall is well formed)."""
    problems = []
    dims = bp.dims
    joints_by_layer = []
    for b in bp.bricks:
        layer_f = b.z / dims.height
        if b.z < -_EPS or abs(layer_f - round(layer_f)) > 1e-6:
            problems.append(f"brick {b.id}: z={b.z} is not a whole multiple of the brick height")
    for i, ids in enumerate(bp.layers):
        layer = [bp.brick(k) for k in ids]
        if not layer:
            problems.append(f"layer {i} is empty")
            joints_by_layer.append(set())
            continue
        x = 0.0
        joints = set()
        for pos, b in enumerate(layer):
            size = dims.length_of(b.kind)
            left = b.x - size / 2
            if abs(left - x) > 1e-6:
                problems.append(f"layer {i}: gap or overlap before brick {b.id} at x={left:.6f}")
            if b.kind is BrickKind.HALF and 0 < pos < len(layer) - 1:
                problems.append(f"layer {i}: half brick {b.id} in the middle of the layer")
            x = left + size
            if pos < len(layer) - 1:
                joints.add(round(x, 6))
        if abs(x - bp.length) > 1e-6:
            problems.append(f"layer {i}: bricks span {x:.6f} m, wall length is {bp.length:.6f} m")
        joints_by_layer.append(joints)
    for i in range(1, len(joints_by_layer)):
        shared = joints_by_layer[i] & joints_by_layer[i - 1]
        if shared:
            problems.append(f"layers {i - 1} and {i}: vertical joints align at x={sorted(shared)}")
    return problems


# ---------------------------------------------------------------- JSON format

def blueprint_to_dict(bp: WallBlueprint) -> dict:
    bricks = []
    for b in bp.bricks:
        entry = {
            "id": b.id,
            "kind": b.kind.value,
            "center": list(b.center),
            "yaw": b.yaw,
            "reward": b.reward,
            "duration_s": b.duration_s,
        }
        if b.placed:
            entry["placed"] = True
        if b.robots_required != 1:
            entry["robots_required"] = b.robots_required
        bricks.append(entry)
    return {
        "dims": {
            "full_length": bp.dims.full_length,
            "half_length": bp.dims.half_length,
            "width": bp.dims.width,
            "height": bp.dims.height,
        },
        "length": bp.length,
        "height": bp.height,
        "bricks": bricks,
    }


def _need(obj: dict, key: str, where: str, kinds):
    if key not in obj:
        raise WallFormatError(f"{where}: missing required field {key!r}")
    value = obj[key]
    if not isinstance(value, kinds) or isinstance(value, bool) and bool not in kinds:
        raise WallFormatError(f"{where}.{key}: unexpected type {type(value).__name__}")
    return value


def blueprint_from_dict(data) -> WallBlueprint:
    if not isinstance(data, dict):
        raise WallFormatError("top level: expected an object")
    raw_dims = _need(data, "dims", "top level", (dict,))
    try:
        dims = BrickDimensions(
            full_length=float(_need(raw_dims, "full_length", "dims", (int, float))),
            width=float(_need(raw_dims, "width", "dims", (int, float))),
            height=float(_need(raw_dims, "height", "dims", (int, float))),
        )
    except DimensionError as exc:
        raise WallFormatError(f"dims: {exc}") from exc
    if "half_length" in raw_dims and abs(raw_dims["half_length"] - dims.half_length) > 1e-9:
        raise WallFormatError("dims.half_length: must equal full_length / 2")

    bricks = []
    for k, raw in enumerate(_need(data, "bricks", "top level", (list,))):
        where = f"bricks[{k}]"
        if not isinstance(raw, dict):
            raise WallFormatError(f"{where}: expected an object")
        kind_name = _need(raw, "kind", where, (str,))
        try:
            kind = BrickKind(kind_name)
        except ValueError:
            raise WallFormatError(f"{where}.kind: unknown brick kind {kind_name!r}") from None
        center = _need(raw, "center", where, (list,))
        if len(center) != 3 or not all(isinstance(c, (int, float)) for c in center):
            raise WallFormatError(f"{where}.center: expected three numbers")
        reward = _need(raw, "reward", where, (int,))
        if reward < 0:
            raise WallFormatError(f"{where}.reward: must be non-negative")
        duration = float(_need(raw, "duration_s", where, (int, float)))
        if duration <= 0:
            raise WallFormatError(f"{where}.duration_s: must be positive")
        bricks.append(Brick(
            id=_need(raw, "id", where, (int,)),
            kind=kind,
            center=tuple(float(c) for c in center),
            yaw=float(_need(raw, "yaw", where, (int, float))),
            reward=reward,
            duration_s=duration,
            placed=bool(raw.get("placed", False)),
            robots_required=int(raw.get("robots_required", 1)),
        ))

    length = data.get("length")
    height = data.get("height")
    if length is None or height is None:
        # derive from geometry when absent
        length = max((b.x + dims.length_of(b.kind) / 2 for b in bricks), default=0.0)
        height = max((b.z + dims.height for b in bricks), default=0.0)
    return WallBlueprint(bricks=tuple(bricks), dims=dims, length=float(length), height=float(height))


def save_wall(bp: WallBlueprint, path) -> None:
    text = json.dumps(blueprint_to_dict(bp), indent=1)
    if str(path) == "-":
        print(text)
        return
    Path(path).write_text(text + "\n")


def loads_wall(text: str) -> WallBlueprint:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WallFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return blueprint_from_dict(data)


def load_wall(path) -> WallBlueprint:
    """Read a wall JSON file. Raises OSError for unreadable paths, WallFormatError for bad content."""
    return loads_wall(Path(path).read_text())
