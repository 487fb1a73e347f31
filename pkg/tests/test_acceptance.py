"""Acceptance criteria 1-12, each at its stated tolerance and runtime limit.

Each test carries ``@pytest.mark.acceptance(n, title, limit_s)``; the
conftest prints one PASS/FAIL line per criterion after the run.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from helpers import (box_env, euler_free_triangles, hand_harmonic_mean, random_convex_obstacles, square,
                     straight_fuel, trochoid, uniform_field)
from renew import cli
from renew.baseline import GridAStarPlanner
from renew.contingency import simulate_contingency
from renew.dynamics import VehicleState, best_effort_distance_samples, integrate
from renew.env import VehicleModel, rasterize_field
from renew.geometry import polygon_area
from renew.homotopy import channel_contains, enumerate_channels, path_signature
from renew.mesh import build_dual, build_navmesh
from renew.padding import compute_adaptive_padding, encroachment_frequency, offset_from_samples
from renew.planner import CandidatePath, PlanConfig, fuel_cost, plan, select_homotopy
from renew.scenarios import generate

acceptance = pytest.mark.acceptance


# --- shared expensive runs ----------------------------------------------

@pytest.fixture(scope="module")
def four_gyre():
    return generate("four-gyre")


@pytest.fixture(scope="module")
def four_gyre_k16(four_gyre):
    env = four_gyre
    return plan(env, env.start, env.goal, PlanConfig(k=16, n_samples=500))


@pytest.fixture(scope="module")
def four_gyre_k1(four_gyre):
    env = four_gyre
    return plan(env, env.start, env.goal, PlanConfig(k=1, n_samples=500))


@pytest.fixture(scope="module")
def four_gyre_astar(four_gyre):
    return GridAStarPlanner(resolution=2.0, motion="dubins").fit(four_gyre).plan()


# --- 1 -------------------------------------------------------------------

@acceptance(1, "fuel-integral oracle (zero / aiding / opposing current)", 1.0)
def test_c01_fuel_integral_oracle():
    v = VehicleModel()
    path = np.array([[0.0, 50.0], [100.0, 50.0]])
    for c_along, expected in ((0.0, 100.0), (0.5, 100.0 / 1.5), (-0.5, 200.0)):
        fld = uniform_field(vx=c_along)
        got = fuel_cost(path, fld, v, alpha=1.0, k_exp=2.0)
        assert got == pytest.approx(straight_fuel(100.0, 1.0, c_along), rel=1e-6)
        assert got == pytest.approx(expected, rel=1e-6)


# --- 2 -------------------------------------------------------------------

@acceptance(2, "dynamics oracle (circle and trochoid within 1e-4 m)", 5.0)
def test_c02_dynamics_oracle():
    v = VehicleModel(v_thrust=1.0, omega_max=math.radians(35.0))
    w = v.omega_max
    T = 2 * math.pi / w
    start = VehicleState(10.0, 20.0, 0.3)
    for c in ((0.0, 0.0), (0.3, -0.2)):
        fld = uniform_field(*c, bounds=(-200.0, -200.0, 200.0, 200.0), spacing=10.0)
        traj = integrate(start, w, fld, v, dt=1e-3, duration=T)
        exact = trochoid((10.0, 20.0), 0.3, 1.0, w, c, traj.times)
        assert np.abs(traj.positions - exact).max() < 1e-4
    # radius check for the zero-current circle: r = v / omega
    traj = integrate(start, w, uniform_field(bounds=(-200.0, -200.0, 200.0, 200.0)), v, 1e-3, T)
    r = 1.0 / w
    center = np.array([10.0, 20.0]) + r * np.array([-math.sin(0.3), math.cos(0.3)])
    assert np.abs(np.linalg.norm(traj.positions - center, axis=1) - r).max() < 1e-4


# --- 3 -------------------------------------------------------------------

def _vertex_index(mesh):
    return {(round(float(x), 9), round(float(y), 9)): i for i, (x, y) in enumerate(mesh.vertices)}


@acceptance(3, "mesh invariants on 50 random polygon-with-holes maps", 30.0)
def test_c03_mesh_invariants():
    rng = np.random.default_rng(2024)
    for trial in range(50):
        n = int(rng.integers(0, 6))
        obstacles = random_convex_obstacles(rng, n)
        env = box_env(obstacles)
        mesh = build_navmesh(env)
        idx = _vertex_index(mesh)
        # every obstacle and bounds segment survives as a constrained edge
        loops = [np.asarray(p) for p in env.obstacles] + [env.bounds_polygon()]
        for poly in loops:
            for a, b in zip(poly, np.roll(poly, -1, axis=0)):
                u = idx[(round(a[0], 9), round(a[1], 9))]
                w = idx[(round(b[0], 9), round(b[1], 9))]
                assert (min(u, w), max(u, w)) in mesh.constrained_edges
        free = sum(mesh.triangle_area(t) for t in mesh.free_ids)
        obst = sum(abs(polygon_area(p)) for p in env.obstacles)
        assert free + obst == pytest.approx(env.width * env.height, rel=1e-6)
        n_vertices = 4 + sum(len(p) for p in env.obstacles)
        assert len(mesh.free_ids) == euler_free_triangles(n_vertices, len(env.obstacles))
    # constructed case: square bounds, one square hole, 8 vertices -> 8 free triangles
    mesh = build_navmesh(box_env([square(50, 50, 10)]))
    assert len(mesh.vertices) == 8 and len(mesh.free_ids) == 8 == euler_free_triangles(8, 1)
    assert len(build_navmesh(box_env()).free_ids) == 2


# --- 4 -------------------------------------------------------------------

def _random_channel_path(rng, channel, mesh):
    pts = [np.asarray(channel.start, float)]
    for a, b in channel.passing_segments(mesh):
        pts.append(a + rng.uniform(0.01, 0.99) * (b - a))
    pts.append(np.asarray(channel.goal, float))
    return np.asarray(pts)


@acceptance(4, "homotopy correctness (counts, distinct and stable signatures, <= 2^n)", 60.0)
def test_c04_homotopy_correctness():
    start, goal = (5.0, 5.0), (95.0, 95.0)
    env = box_env()
    mesh = build_navmesh(env)
    assert len(enumerate_channels(build_dual(mesh), mesh, start, goal, 16, env.obstacles)) == 1
    env = box_env([square(50, 50, 12)])
    mesh = build_navmesh(env)
    assert len(enumerate_channels(build_dual(mesh), mesh, start, goal, 4, env.obstacles)) == 2

    rng = np.random.default_rng(7)
    for trial in range(12):
        n = int(rng.integers(1, 5))
        env = box_env(random_convex_obstacles(rng, n, cells=3))
        mesh = build_navmesh(env)
        if env.in_obstacle([start, goal]).any():
            continue
        chans = enumerate_channels(build_dual(mesh), mesh, start, goal, 16, env.obstacles)
        assert 1 <= len(chans) <= min(16, 2 ** n)
        sigs = [c.signature for c in chans]
        assert len(set(sigs)) == len(sigs)
        for ch in chans:
            for _ in range(100):
                p = _random_channel_path(rng, ch, mesh)
                assert channel_contains(ch, p, mesh)
                assert path_signature(p, env.obstacles) == ch.signature


# --- 5 -------------------------------------------------------------------

@acceptance(5, "padding probabilistic bound, degenerate case, monotone in sigma", 300.0)
def test_c05_padding_bound():
    env = generate("ablation")
    mesh = build_navmesh(env)
    chans = enumerate_channels(build_dual(mesh), mesh, env.start, env.goal, 4, env.obstacles)
    limit = 0.05 + 3 * math.sqrt(0.05 * 0.95 / 2000)
    for ch in chans:
        rep = compute_adaptive_padding(ch, mesh, env, sigma=0.95, n_samples=500, seed=0)
        freq = encroachment_frequency(rep, ch, mesh, env, n_trials=2000, seed=987654)
        assert freq <= limit, (freq, limit)

    # zero current, zero noise, no heading spread: one deterministic encroachment for every sigma
    calm = generate("ablation", magnitude=0.0, noise_dir=0.0, noise_mag=0.0)
    ch = enumerate_channels(build_dual(mesh), mesh, calm.start, calm.goal, 1, calm.obstacles)[0]
    offs = [compute_adaptive_padding(ch, mesh, calm, sigma=s, n_samples=200, seed=0, heading_spread=0.0).per_edge
            for s in (0.5, 0.8, 0.9, 0.95, 0.99)]
    assert all(o == offs[0] for o in offs)

    ch = chans[0]
    prev = None
    for s in (0.5, 0.8, 0.9, 0.95, 0.99):
        rep = compute_adaptive_padding(ch, mesh, env, sigma=s, n_samples=500, seed=0)
        if prev is not None:
            assert all(rep.per_edge[e] >= prev[e] - 1e-12 for e in prev)
        prev = rep.per_edge


# --- 6 -------------------------------------------------------------------

@acceptance(6, "directional asymmetry: toward-edge offset > 1.5 x away-edge offset", 120.0)
def test_c06_directional_asymmetry():
    v = VehicleModel()
    # edge along y = 50 with free water to the south; travel is eastward along it
    edge = (np.array([80.0, 50.0]), np.array([20.0, 50.0]))
    region = np.array([[30.0, 40.0], [70.0, 40.0], [50.0, 50.0]])
    out = {}
    for label, direction in (("toward", 90.0), ("away", 270.0)):
        fld = rasterize_field("uniform", (0.0, 0.0, 100.0, 100.0), 5.0,
                              {"direction_deg": direction, "magnitude": 0.4}, (0.1, 0.05))
        s = best_effort_distance_samples(region, 0.0, fld, v, edge, 500, np.random.default_rng(11))
        out[label] = offset_from_samples(s, 0.95)
    assert out["toward"] > 1.5 * out["away"]
    assert out["toward"] > 0


# --- 7 -------------------------------------------------------------------

@acceptance(7, "homotopy budget: four-gyre fuel(k=16) <= 0.9 fuel(k=1) at N=500", 600.0)
def test_c07_homotopy_budget(four_gyre_k1, four_gyre_k16):
    f1 = four_gyre_k1.metrics["fuel"]
    f16 = four_gyre_k16.metrics["fuel"]
    assert f16 < f1
    assert f16 / f1 <= 0.9
    assert len(four_gyre_k16.channels) >= 2
    assert four_gyre_k16.chosen_channel.signature != four_gyre_k1.chosen_channel.signature


# --- 8 -------------------------------------------------------------------

@acceptance(8, "baseline ordering: RENEW beats smoothed grid A* (four-gyre F/D, ablation 270 fuel)", 600.0)
def test_c08_baseline_ordering(four_gyre_k16, four_gyre_astar):
    assert four_gyre_k16.metrics["fd"] < four_gyre_astar.metrics_smoothed["fd"]
    env = generate("ablation", beta_deg=270.0)
    renew = plan(env, env.start, env.goal, PlanConfig(k=16, n_samples=500))
    grid = GridAStarPlanner(resolution=2.0, motion="dubins").fit(env).plan()
    assert renew.metrics["fuel"] < grid.metrics_smoothed["fuel"]


# --- 9 -------------------------------------------------------------------

@acceptance(9, "states gap: grid A* (2 m) explores >= 100x RENEW's states on four-gyre", 300.0)
def test_c09_states_gap(four_gyre_k16, four_gyre_astar):
    assert four_gyre_astar.metrics_original["states"] >= 100 * four_gyre_k16.metrics["states"]


# --- 10 ------------------------------------------------------------------

@acceptance(10, "contingency: 0 collisions for RENEW on four-gyre and strait over 10 seeds; hugging path collides",
            600.0)
def test_c10_contingency(four_gyre, four_gyre_k16):
    strait = generate("strait")
    strait_plan = plan(strait, strait.start, strait.goal, PlanConfig(k=16, n_samples=500))
    for env, res in ((four_gyre, four_gyre_k16), (strait, strait_plan)):
        for seed in range(10):
            rep = simulate_contingency(res.chosen_path.waypoints, env, spacing=1.0, seed=seed)
            assert rep.collisions == 0, (env.name, seed, rep.collision_sites[:3])
    hug = generate("hugging")
    grid = GridAStarPlanner(resolution=2.0, motion="dubins", padding="none").fit(hug).plan()
    assert simulate_contingency(grid.smoothed, hug, spacing=1.0, seed=0).collisions >= 1


# --- 11 ------------------------------------------------------------------

def _cands(cid, fuels):
    return [CandidatePath(np.zeros((2, 2)), cid, float(f), True, 1.0, i) for i, f in enumerate(fuels)]


@acceptance(11, "harmonic-mean selection: hand example and scale invariance over 1000 instances", 5.0)
def test_c11_harmonic_mean():
    cands = {0: _cands(0, [100, 200]), 1: _cands(1, [120, 130])}
    assert hand_harmonic_mean([100, 200]) == pytest.approx(133.333333, rel=1e-6)
    assert hand_harmonic_mean([120, 130]) == pytest.approx(124.8, rel=1e-9)
    assert select_homotopy(cands) == 1
    rng = np.random.default_rng(0)
    for _ in range(1000):
        m = int(rng.integers(1, 6))
        fuels = {c: rng.uniform(1.0, 500.0, int(rng.integers(1, 8))) for c in range(m)}
        base = {c: _cands(c, f) for c, f in fuels.items()}
        expected = min(fuels, key=lambda c: (hand_harmonic_mean(fuels[c]), c))
        assert select_homotopy(base) == expected
        s = float(rng.uniform(0.01, 100.0))
        scaled = {c: _cands(c, f * s) for c, f in fuels.items()}
        assert select_homotopy(scaled) == expected


# --- 12 ------------------------------------------------------------------

CLI_RUNS = [
    ["plan", "--env", "strait", "--k", "1,4", "--samples", "60", "--padding-samples", "100"],
    ["compare", "--env", "ablation", "--k", "2", "--samples", "60", "--padding-samples", "100"],
    ["padding-report", "--env", "strait", "--k", "4", "--padding-samples", "100"],
    ["contingency", "--env", "hugging", "--planner", "grid-astar-s", "--spacing", "2"],
    ["contingency", "--env", "strait", "--k", "2", "--samples", "40", "--padding-samples", "100", "--spacing", "2"],
    ["mesh-dump", "--env", "four-gyre"],
]


@acceptance(12, "determinism: CLI re-runs give byte-identical CSVs", 300.0)
def test_c12_cli_determinism(tmp_path):
    for n, argv in enumerate(CLI_RUNS):
        outs = []
        for rep in range(2):
            d = tmp_path / f"run{n}_{rep}"
            assert cli.main(argv + ["--out", str(d), "--no-svg"]) == 0
            outs.append(d)
        a = sorted(p.name for p in outs[0].glob("*.csv"))
        b = sorted(p.name for p in outs[1].glob("*.csv"))
        assert a and a == b
        for name in a:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), (argv[0], name)
