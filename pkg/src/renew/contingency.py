"""Abort-maneuver validation along a planned path.

At every station the vehicle is assumed to meet an unexpected obstacle and
performs a hard-over turn in each direction under a perturbed current. A
trial counts as a collision only when both turns enter the hard no-go zone.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import VERIFY_DT, simulate_hard_over
from .geometry import points_in_polygon, points_segments_distance, polyline_length, polyline_point_at


@dataclass(frozen=True)
class CollisionSite:
    s: float
    turn: str
    clearance: float


@dataclass(frozen=True)
class ContingencyReport:
    trials: int
    collisions: int
    collision_sites: tuple
    rows: tuple = field(default=(), repr=False)  # (station, s, turn, clearance, collided)
    spacing: float = 1.0
    seed: int = 0

    def to_rows(self):
        out = [{"station_s": s, "turn": turn, "clearance": c, "collided": int(col)}
               for _, s, turn, c, col in self.rows]
        return out

    def summary(self):
        return {"trials": self.trials, "collisions": self.collisions}


class _PerturbedField:
    """Mean field rotated by ``dtheta`` and scaled by ``(|c| + dmag) / |c|`` per vehicle."""

    def __init__(self, field, dtheta, dmag):
        self.field = field
        self.cos = np.cos(dtheta)
        self.sin = np.sin(dtheta)
        self.dmag = dmag

    def sample(self, p):
        c = self.field.sample(p)
        m = np.linalg.norm(c, axis=1)
        scale = np.where(m > 0, np.maximum(m + self.dmag, 0.0) / np.where(m > 0, m, 1.0), 0.0)
        rx = self.cos * c[:, 0] - self.sin * c[:, 1]
        ry = self.sin * c[:, 0] + self.cos * c[:, 1]
        return np.stack([rx * scale, ry * scale], axis=1)


def stations(path, spacing):
    L = polyline_length(path)
    n = int(math.floor(L / spacing + 1e-9)) + 1
    return np.arange(n) * spacing


def _obstacle_edges(obstacles):
    a, b = [], []
    for poly in obstacles:
        p = np.asarray(poly)
        a.append(p)
        b.append(np.roll(p, -1, axis=0))
    if not a:
        return np.zeros((0, 2)), np.zeros((0, 2))
    return np.concatenate(a), np.concatenate(b)


def _signed_clearance(P, obstacles, edges):
    """Minimum signed distance to the obstacles over each trajectory (negative = inside)."""
    n, m, _ = P.shape
    out = np.full(m, math.inf)
    if not len(obstacles):
        return out
    sa, sb = edges
    for k in range(m):
        pts = P[:, k, :]
        d = points_segments_distance(pts, sa, sb).min(axis=1)
        inside = np.zeros(len(pts), dtype=bool)
        for poly in obstacles:
            inside |= points_in_polygon(pts, poly)
        out[k] = float(np.where(inside, -d, d).min())
    return out


def _trial_draws(seed, k, noise_dir, noise_mag):
    rng = np.random.default_rng([int(seed), int(k)])
    dth = rng.normal(0.0, noise_dir) if noise_dir > 0 else 0.0
    dmag = rng.normal(0.0, noise_mag) if noise_mag > 0 else 0.0
    return dth, dmag


def run_trials(path, env, vehicle, s_values, indices, seed=0, noise=True, dt=VERIFY_DT):
    """Clearances ``(len(s), 2)`` for left/right hard-over turns at the given arc lengths."""
    vehicle = vehicle or env.vehicle
    fld = env.field
    nd = fld.noise_sigma_dir if noise else 0.0
    nm = fld.noise_sigma_mag if noise else 0.0
    pos, hdg, dth, dmag = [], [], [], []
    for s, k in zip(s_values, indices):
        p, u = polyline_point_at(path, s)
        pos.append(p)
        hdg.append(math.atan2(u[1], u[0]))
        a, b = _trial_draws(seed, k, nd, nm)
        dth.append(a)
        dmag.append(b)
    m = len(pos)
    if m == 0:
        return np.zeros((0, 2))
    pos = np.asarray(pos)
    both_p = np.concatenate([pos, pos])
    both_h = np.concatenate([hdg, hdg])
    turns = np.concatenate([np.ones(m), -np.ones(m)])
    pf = _PerturbedField(fld, np.concatenate([dth, dth]), np.concatenate([dmag, dmag]))
    P = simulate_hard_over(both_p, both_h, turns, vehicle, dt, field=pf)
    clear = _signed_clearance(P, env.obstacles, _obstacle_edges(env.obstacles))
    return np.column_stack([clear[:m], clear[m:]])


def simulate_contingency(path, env, vehicle=None, spacing=1.0, seed=0, noise=True, dt=VERIFY_DT):
    """Abort trials every ``spacing`` meters along ``path``.

    Heading at a station is the local path tangent (the outgoing segment at
    a corner). Each trial draws its own current perturbation from a
    substream keyed by ``(seed, station index)``.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    path = np.asarray(path, dtype=float)
    s_vals = stations(path, spacing)
    idx = np.arange(len(s_vals))
    clear = run_trials(path, env, vehicle, s_vals, idx, seed, noise, dt)
    rows, sites = [], []
    collisions = 0
    for k, s in enumerate(s_vals):
        cl, cr = clear[k]
        collided = cl < 0 and cr < 0
        rows.append((k, float(s), "left", float(cl), collided))
        rows.append((k, float(s), "right", float(cr), collided))
        if collided:
            collisions += 1
            best = "left" if cl >= cr else "right"
            sites.append(CollisionSite(float(s), best, float(max(cl, cr))))
    return ContingencyReport(len(s_vals), collisions, tuple(sites), tuple(rows), spacing, seed)


def replay_trial(path, env, station, vehicle=None, spacing=1.0, seed=0, noise=True, dt=VERIFY_DT):
    """Re-simulate a single station in isolation; returns (left, right) clearances."""
    s = station * spacing
    return tuple(run_trials(np.asarray(path, float), env, vehicle, [s], [station], seed, noise, dt)[0])
