import json

import pytest

from wallplan.datasets import BENCH_WALLS, SMALL_SETS, build_fixture, fixture_names, load_fixture
from wallplan.errors import DimensionError, UnsupportedBondError, WallFormatError
from wallplan.wall import (
    Brick,
    BrickDimensions,
    BrickKind,
    WallBlueprint,
    blueprint_to_dict,
    check_blueprint,
    generate_wall,
    load_wall,
    loads_wall,
    save_wall,
    wall_reward_total,
)

F, H = BrickKind.FULL, BrickKind.HALF


def kinds(bp, layer):
    return [bp.brick(i).kind for i in bp.layers[layer]]


class TestGenerate:
    def test_two_layer_example(self):
        bp = generate_wall(2.4, 0.4)
        assert len(bp) == 9
        assert kinds(bp, 0) == [F] * 4
        assert kinds(bp, 1) == [H, F, F, F, H]
        assert check_blueprint(bp) == []

    def test_single_brick(self):
        bp = generate_wall(0.6, 0.2)
        assert len(bp) == 1 and bp.bricks[0].kind is F

    def test_odd_half_count(self):
        bp = generate_wall(2.7, 0.4)
        assert kinds(bp, 0) == [F, F, F, F, H]
        assert kinds(bp, 1) == [H, F, F, F, F]
        assert check_blueprint(bp) == []

    def test_ids_left_to_right_bottom_to_top(self):
        bp = generate_wall(2.4, 0.8)
        assert [b.id for b in bp.bricks] == list(range(1, 19))
        flat = [i for layer in bp.layers for i in layer]
        assert flat == list(range(1, 19))

    def test_bad_length(self):
        with pytest.raises(DimensionError):
            generate_wall(2.5, 0.4)

    def test_bad_height(self):
        with pytest.raises(DimensionError):
            generate_wall(2.4, 0.3)

    def test_unknown_bond(self):
        with pytest.raises(UnsupportedBondError):
            generate_wall(2.4, 0.4, bond="flemish")

    def test_half_is_half(self):
        d = BrickDimensions(0.5, 0.25, 0.1)
        assert d.half_length == 0.25
        with pytest.raises(DimensionError):
            BrickDimensions(0.0, 0.3, 0.2)

    @pytest.mark.parametrize("halves", range(1, 16))
    @pytest.mark.parametrize("layers", [1, 2, 3, 5])
    def test_invariants_hold_everywhere(self, halves, layers):
        dims = BrickDimensions()
        bp = generate_wall(halves * dims.half_length, layers * dims.height, dims)
        assert check_blueprint(bp) == []
        for ids in bp.layers:
            total = sum(dims.length_of(bp.brick(i).kind) for i in ids)
            assert abs(total - bp.length) < 1e-9
            word = "".join("F" if bp.brick(i).kind is F else "H" for i in ids)
            assert word.strip("H").count("H") == 0  # halves only at the ends

    def test_count_grows_linearly(self):
        counts = [len(generate_wall(0.6 * n, 0.4)) for n in range(2, 8)]
        steps = {b - a for a, b in zip(counts, counts[1:])}
        assert steps == {2}
        by_layers = [len(generate_wall(2.4, 0.2 * k)) for k in range(1, 7)]
        assert by_layers == [4, 9, 13, 18, 22, 27]


class TestChecker:
    def test_detects_aligned_joints(self):
        d = BrickDimensions()
        bricks = (Brick(1, F, (0.3, 0, 0)), Brick(2, F, (0.9, 0, 0)),
                  Brick(3, F, (0.3, 0, 0.2)), Brick(4, F, (0.9, 0, 0.2)))
        bp = WallBlueprint(bricks, d, 1.2, 0.4)
        assert any("align" in p for p in check_blueprint(bp))

    def test_detects_gap(self):
        bricks = (Brick(1, F, (0.3, 0, 0)), Brick(2, F, (1.0, 0, 0)))
        assert any("gap" in p for p in check_blueprint(WallBlueprint(bricks, BrickDimensions(), 1.3, 0.2)))


class TestReward:
    def test_wall18(self):
        bp = load_fixture("wall_18")
        assert sum(b.kind is F for b in bp.bricks) == 14
        assert sum(b.kind is H for b in bp.bricks) == 4
        assert wall_reward_total(bp) == 32

    def test_empty(self):
        assert wall_reward_total(WallBlueprint(())) == 0

    def test_full_plus_half(self):
        bp = WallBlueprint((Brick(1, F, (0.3, 0, 0), reward=2), Brick(2, H, (0.75, 0, 0), reward=1)))
        assert wall_reward_total(bp) == 3


class TestSerialization:
    def test_round_trip(self, tmp_path):
        bp = load_fixture("wall_5")
        save_wall(bp, tmp_path / "w.json")
        assert load_wall(tmp_path / "w.json") == bp

    def test_round_trip_wall18(self, tmp_path):
        bp = generate_wall(2.4, 0.8)
        save_wall(bp, tmp_path / "w.json")
        back = load_wall(tmp_path / "w.json")
        assert back.bricks == bp.bricks and back.dims == bp.dims

    def test_placed_flag_round_trips(self, tmp_path):
        bp = generate_wall(2.4, 0.4).with_placed([1, 2])
        save_wall(bp, tmp_path / "w.json")
        raw = json.loads((tmp_path / "w.json").read_text())
        assert raw["bricks"][0]["placed"] is True and "placed" not in raw["bricks"][2]
        assert load_wall(tmp_path / "w.json") == bp

    def test_missing_center_named(self):
        data = blueprint_to_dict(generate_wall(1.2, 0.2))
        del data["bricks"][1]["center"]
        with pytest.raises(WallFormatError, match=r"bricks\[1\].*'center'"):
            loads_wall(json.dumps(data))

    def test_bad_json_reports_line(self):
        with pytest.raises(WallFormatError, match="line 2"):
            loads_wall('{"dims": {},\n "bricks": [,]}')

    def test_unknown_kind(self):
        data = blueprint_to_dict(generate_wall(1.2, 0.2))
        data["bricks"][0]["kind"] = "quarter"
        with pytest.raises(WallFormatError, match="kind"):
            loads_wall(json.dumps(data))

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_wall(tmp_path / "nope.json")


class TestFixtures:
    @pytest.mark.parametrize("name,count", [("wall_5", 5), ("wall_18", 18), ("wall_39", 39),
                                            ("wall_68", 68), ("wall_105", 105), ("wall_150", 150)])
    def test_bench_counts(self, name, count):
        assert len(load_fixture(name)) == count

    @pytest.mark.parametrize("name", list(SMALL_SETS))
    def test_small_sets(self, name):
        bp = load_fixture(name)
        assert 7 <= len(bp) <= 10
        assert check_blueprint(bp) == []

    @pytest.mark.parametrize("name", list(BENCH_WALLS) + list(SMALL_SETS))
    def test_shipped_matches_recipe(self, name):
        assert load_fixture(name) == build_fixture(name)

    def test_env_override(self, tmp_path, monkeypatch):
        save_wall(generate_wall(0.6, 0.2), tmp_path / "wall_5.json")
        monkeypatch.setenv("WALLPLAN_FIXTURES", str(tmp_path))
        assert len(load_fixture("wall_5")) == 1

    def test_names(self):
        assert len(fixture_names()) == 16
