import json
import math

import numpy as np
import pytest

from helpers import box_env, square, uniform_field
from renew.env import (CurrentField, VehicleModel, environment_from_dict, load_environment, local_current_stats,
                       make_environment, rasterize_field, save_environment)
from renew.exceptions import InvalidEnvironment


def test_uniform_field_from_direction():
    f = rasterize_field("uniform", (0, 0, 50, 50), 5, {"direction_deg": 90.0, "magnitude": 0.3})
    assert np.allclose(f.sample([[12.3, 4.5]]), [[0.0, 0.3]], atol=1e-12)
    assert f.max_speed == pytest.approx(0.3)


def test_integer_bounds_do_not_truncate_field():
    f = rasterize_field("uniform", (0, 0, 10, 10), 1, {"vx": 0.25, "vy": 0.0})
    assert f.grid.dtype.kind == "f"
    assert np.allclose(f.grid[..., 0], 0.25)


def test_bilinear_sampling_exact_for_linear_field():
    xs = np.arange(0, 21, 5.0)
    X, Y = np.meshgrid(xs, xs)
    grid = np.stack([0.01 * X + 0.02 * Y, -0.03 * X], axis=-1)
    f = CurrentField(grid, 5.0, (0.0, 0.0))
    pts = np.random.default_rng(1).uniform(0, 20, (50, 2))
    exp = np.column_stack([0.01 * pts[:, 0] + 0.02 * pts[:, 1], -0.03 * pts[:, 0]])
    assert np.allclose(f.sample(pts), exp)
    assert np.allclose([f.sample_xy(*p) for p in pts], exp)
    # single point returns shape (2,)
    assert f.sample(pts[0]).shape == (2,)


def test_sampling_clamps_outside_grid():
    f = uniform_field(vx=0.2)
    assert np.allclose(f.sample([[-10.0, 500.0]]), [[0.2, 0.0]])


@pytest.mark.parametrize("gen", ["four_gyre", "single_gyre", "jet"])
def test_analytic_generators_are_finite(gen):
    f = rasterize_field(gen, (0.0, 0.0, 100.0, 100.0), 5.0)
    assert np.isfinite(f.grid).all() and f.max_speed > 0


def test_local_current_stats_uniform_field_noise_only():
    f = uniform_field(vx=0.3, noise=(0.1, 0.02))
    mean, sd_dir, sd_mag = local_current_stats(f, np.array([[10, 10], [40, 10], [20, 40]], float))
    assert np.allclose(mean, [0.3, 0.0])
    assert sd_dir == pytest.approx(0.1) and sd_mag == pytest.approx(0.02)


def test_vehicle_turn_radius():
    v = VehicleModel(v_thrust=2.0, omega_max=0.5)
    assert v.turn_radius == pytest.approx(4.0)


@pytest.mark.parametrize("obstacles, msg", [
    ([[[0, 0], [1, 1]]], "at least 3"),
    ([[[10, 10], [30, 10], [10, 20], [20, 20]]], "simple"),
    ([[[10, 10], [20, 10], [30, 10]]], "degenerate"),
    ([square(30, 30, 5), square(33, 33, 5)], "overlap"),
    ([square(98, 50, 5)], "outside bounds"),
])
def test_invalid_obstacles_rejected(obstacles, msg):
    with pytest.raises(InvalidEnvironment, match=msg):
        box_env(obstacles)


def test_overactuated_current_rejected():
    with pytest.raises(InvalidEnvironment, match="underactuated"):
        box_env(vx=1.2)


def test_clockwise_obstacles_are_reoriented():
    env = box_env([square(50, 50, 5)[::-1]])
    from renew.geometry import polygon_area
    assert polygon_area(env.obstacles[0]) > 0


def test_roundtrip_grid_and_analytic(tmp_path):
    env = box_env([square(50, 50, 10)], vx=0.2, start=(5, 5), goal=(95, 95))
    p = tmp_path / "env.json"
    save_environment(env, p)
    back = load_environment(p)
    assert back.bounds == env.bounds and back.start == (5.0, 5.0)
    assert np.allclose(back.field.grid, env.field.grid)
    doc = {"bounds": [0, 0, 60, 60], "obstacles": [],
           "field": {"type": "analytic", "generator": "uniform", "spacing": 5, "params": {"vx": 0.1}}}
    e2 = environment_from_dict(doc)
    save_environment(e2, p)
    assert json.loads(p.read_text())["field"]["type"] == "analytic"
    assert np.allclose(load_environment(p).field.grid, e2.field.grid)


def test_csv_field(tmp_path):
    (tmp_path / "c.csv").write_text("x_index,y_index,vx,vy\n" + "".join(
        f"{i},{j},0.1,{0.05 * j}\n" for i in range(3) for j in range(3)))
    doc = {"bounds": [0, 0, 20, 20], "field": {"type": "grid", "csv": "c.csv", "spacing": 10}}
    (tmp_path / "e.json").write_text(json.dumps(doc))
    env = load_environment(tmp_path / "e.json")
    assert np.allclose(env.field.sample([[10.0, 15.0]]), [[0.1, 0.075]])


def test_load_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_environment(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InvalidEnvironment, match="parse"):
        load_environment(bad)
    bad.write_text(json.dumps({"obstacles": []}))
    with pytest.raises(InvalidEnvironment, match="missing"):
        load_environment(bad)


def test_in_obstacle():
    env = box_env([square(50, 50, 10)])
    assert env.in_obstacle([[50, 50], [5, 5]]).tolist() == [True, False]
    assert math.isclose(env.width, 100.0)


def test_make_environment_keeps_start_goal():
    f = uniform_field()
    env = make_environment((0, 0, 100, 100), [], f, start=[1, 2], goal=[3, 4])
    assert env.start == (1, 2) and env.goal == (3, 4)
