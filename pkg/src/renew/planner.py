"""Channel-level selection by harmonic-mean fuel, then the cheapest path inside it."""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from shapely.geometry import LineString, MultiPolygon, Polygon
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dynamics import DEFAULT_HEADING_SPREAD
from .exceptions import AssumptionViolated, InfeasiblePlan, InvalidQuery
from .geometry import polyline_length
from .homotopy import EnumerationStats, enumerate_channels
from .mesh import build_dual, build_navmesh
from .padding import (DEFAULT_PADDING_SAMPLES, apply_padding, compute_adaptive_padding, fixed_padding,
                      no_padding, parse_padding_scheme, relevant_edges)
from .validation import (check_environment, check_point, check_positive, check_positive_int,
                         check_probability)

logger = logging.getLogger(__name__)

# 5-point Gauss-Legendre on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True, eq=False)
class CandidatePath:
    waypoints: np.ndarray
    channel_id: int
    fuel: float
    feasible: bool
    length: float
    index: int = 0
    turn_ok: bool = True
    clearance_ok: bool = True


@dataclass(frozen=True)
class PlanConfig:
    k: int = 16
    n_samples: int = 500
    sigma: float = 0.95
    alpha: float = 1.0
    k_exp: float = 2.0
    region_radius: float = None   # None -> 2 x field spacing
    padding: str = "adaptive"
    padding_samples: int = DEFAULT_PADDING_SAMPLES
    heading_spread: float = DEFAULT_HEADING_SPREAD
    pad_bounds: bool = True
    seed: int = 0

    def validated(self):
        check_positive_int(self.k, "k")
        check_positive_int(self.n_samples, "n_samples")
        check_probability(self.sigma, "sigma")
        check_positive(self.alpha, "alpha")
        check_positive(self.k_exp, "k_exp", allow_zero=True)
        check_positive_int(self.padding_samples, "padding_samples")
        parse_padding_scheme(self.padding)
        if self.region_radius is not None:
            check_positive(self.region_radius, "region_radius")
        return self


@dataclass(eq=False)
class PlanResult:
    chosen_channel: object
    chosen_path: CandidatePath
    per_channel_scores: dict
    all_candidates: dict
    metrics: dict
    channels: list = field(default_factory=list)
    padded: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    mesh: object = None
    planner: str = "renew"

    def to_dict(self):
        ch = self.chosen_channel
        return {
            "planner": self.planner,
            "chosen_channel": {
                "id": ch.channel_id,
                "triangles": list(ch.triangle_seq),
                "signature": list(ch.signature.crossings),
            },
            "waypoints": self.chosen_path.waypoints.tolist(),
            "metrics": dict(self.metrics),
            "per_channel_scores": {str(k): v for k, v in sorted(self.per_channel_scores.items())},
            "diagnostics": self.diagnostics,
        }


# --- fuel ----------------------------------------------------------------

def _grid_breaks(p0, p1, fld):
    ts = [0.0, 1.0]
    for axis in (0, 1):
        a, b = p0[axis], p1[axis]
        if a == b:
            continue
        n = fld.shape[1 - axis]
        lines = fld.origin[axis] + fld.spacing * np.arange(n)
        t = (lines - a) / (b - a)
        ts.extend(t[(t > 0) & (t < 1)].tolist())
    return np.unique(ts)


def fuel_cost(path, field, vehicle, alpha=1.0, k_exp=2.0, step=None):
    """Fuel integral of alpha * v^k / (v + c . T) along a polyline.

    Segments are split at field lattice lines (where the bilinear field has
    kinks) and into pieces no longer than ``step``, then integrated with
    5-point Gauss-Legendre per piece.
    """
    pts = np.asarray(path, dtype=float)
    v = vehicle.v_thrust
    step = step if step is not None else min(field.spacing / 4.0, 0.5)
    d = np.diff(pts, axis=0)
    L = np.hypot(d[:, 0], d[:, 1])
    keep = L > 0
    if not keep.any():
        return 0.0
    p0, d, L = pts[:-1][keep], d[keep], L[keep]
    s_start = np.concatenate([[0.0], np.cumsum(L)[:-1]])
    seg, ta, tb = [], [], []
    for i in range(len(L)):
        br = _grid_breaks(p0[i], p0[i] + d[i], field)
        seg.append(np.full(len(br) - 1, i))
        ta.append(br[:-1])
        tb.append(br[1:])
    seg, ta, tb = np.concatenate(seg), np.concatenate(ta), np.concatenate(tb)
    n = np.maximum(1, np.ceil((tb - ta) * L[seg] / step - 1e-12).astype(int))
    # split every [ta, tb] into n equal pieces
    piece = np.repeat(np.arange(len(n)), n)
    j = np.arange(len(piece)) - np.repeat(np.cumsum(n) - n, n)
    w = (tb - ta)[piece] / n[piece]
    lo = ta[piece] + w * j
    sg = seg[piece]
    tq = (lo[:, None] + w[:, None] * _GL_X[None, :]).ravel()
    sq = np.repeat(sg, len(_GL_X))
    wq = (w[:, None] * _GL_W[None, :]).ravel() * L[sq]
    c = field.sample(p0[sq] + tq[:, None] * d[sq])
    denom = v + np.einsum("ij,ij->i", c, d[sq]) / L[sq]
    if (denom <= 0).any():
        k = int(np.argmax(denom <= 0))
        bad = float(s_start[sq[k]] + tq[k] * L[sq[k]])
        raise AssumptionViolated(f"assumption violated at s={bad:.3f}: current opposes thrust")
    return float(np.sum(wq * alpha * v ** k_exp / denom))


# --- kinematic check -----------------------------------------------------

def _disc_stencil(radius):
    pts = [(0.0, 0.0)]
    for r in (0.5 * radius, radius):
        for k in range(8):
            a = k * math.pi / 4
            pts.append((r * math.cos(a), r * math.sin(a)))
    return np.asarray(pts)


def _mean_current_disc(field, centers, radius):
    st = _disc_stencil(radius)
    c = np.asarray(centers, dtype=float).reshape(-1, 2)
    vals = field.sample((c[:, None, :] + st[None, :, :]).reshape(-1, 2))
    return vals.reshape(len(c), len(st), 2).mean(axis=1)


def _turn_feasible(prev, cur, nxt, mean_c, vehicle):
    a = cur - prev
    b = nxt - cur
    la = np.linalg.norm(a, axis=-1)
    lb = np.linalg.norm(b, axis=-1)
    ua = a / np.where(la > 0, la, 1.0)[..., None]
    ub = b / np.where(lb > 0, lb, 1.0)[..., None]
    v = vehicle.v_thrust
    vin = np.linalg.norm(v * ua + mean_c, axis=-1)
    vout = np.linalg.norm(v * ub + mean_c, axis=-1)
    r_eff = np.maximum(vin, vout) / vehicle.omega_max
    cosd = np.clip(np.einsum("...i,...i->...", ua, ub), -1.0, 1.0)
    delta = np.arccos(cosd)
    with np.errstate(over="ignore", invalid="ignore"):
        need = r_eff * np.tan(delta / 2.0)
    need = np.where(delta < 1e-12, 0.0, need)
    need = np.where(delta > math.pi - 1e-9, np.inf, need)
    return (la >= need) & (lb >= need)


def check_turn_feasibility(prev, cur, next, field, vehicle, region_radius):
    """Whether an arc of the current-adjusted turning radius fits the corner at ``cur``."""
    prev, cur, next = (np.asarray(p, dtype=float) for p in (prev, cur, next))
    mc = _mean_current_disc(field, cur, region_radius)[0]
    return bool(_turn_feasible(prev, cur, next, mc, vehicle))


def effective_radius(direction, field, point, vehicle, region_radius):
    u = np.asarray(direction, dtype=float)
    u = u / np.hypot(*u)
    mc = _mean_current_disc(field, point, region_radius)[0]
    return float(np.hypot(*(vehicle.v_thrust * u + mc)) / vehicle.omega_max)


# --- sampling ------------------------------------------------------------

def _segments_min_distance(p0, p1, a, b):
    """Vectorized distance between segments p0p1 (n, 2) and the fixed segment ab."""

    def pt_seg(p, s0, s1):
        d = s1 - s0
        dd = np.einsum("...i,...i->...", d, d)
        dd = np.where(dd == 0, 1.0, dd)
        t = np.clip(np.einsum("...i,...i->...", p - s0, d) / dd, 0.0, 1.0)
        return np.linalg.norm(p - (s0 + t[..., None] * d), axis=-1)

    a = np.broadcast_to(a, p0.shape)
    b = np.broadcast_to(b, p0.shape)
    return np.minimum.reduce([pt_seg(p0, a, b), pt_seg(p1, a, b), pt_seg(a, p0, p1), pt_seg(b, p0, p1)])


def sample_paths(padded, start, goal, n, field, vehicle, seed=0, region_radius=None, mesh=None,
                 alpha=1.0, k_exp=2.0):
    """``n`` candidate paths with one waypoint drawn uniformly on each trimmed passing edge.

    A path is feasible when every interior corner passes the effective-radius
    turn check and, if ``mesh`` is given, every interior segment keeps each
    nearby constrained edge's offset. Infeasible paths are kept and flagged.
    """
    if not padded.feasible:
        raise InfeasiblePlan(f"channel {padded.channel.channel_id} is blocked by padding")
    check_positive_int(n, "N")
    rng = np.random.default_rng([int(seed), int(padded.channel.channel_id)])
    region_radius = region_radius if region_radius is not None else 2.0 * field.spacing
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    m = len(padded.trimmed_edges)
    W = np.empty((n, m + 2, 2))
    W[:, 0] = start
    W[:, -1] = goal
    for i, (p, q) in enumerate(padded.trimmed_edges):
        u = rng.uniform(0.0, 1.0, n)
        W[:, i + 1] = p[None, :] + u[:, None] * (q - p)[None, :]
    turn_ok = np.ones(n, dtype=bool)
    if m >= 1:
        mc = _mean_current_disc(field, W[:, 1:-1].reshape(-1, 2), region_radius).reshape(n, m, 2)
        ok = _turn_feasible(W[:, :-2], W[:, 1:-1], W[:, 2:], mc, vehicle)
        turn_ok = ok.all(axis=1)
    clear_ok = np.ones(n, dtype=bool)
    if mesh is not None and m >= 2:
        offsets = padded.report.per_edge
        for i in range(1, m):
            t = padded.channel.triangle_seq[i]
            for e in relevant_edges(mesh, t):
                o = offsets.get(mesh.constrained_edge_ids[e], 0.0)
                if o <= 0:
                    continue
                dist = _segments_min_distance(W[:, i], W[:, i + 1], mesh.vertices[e[0]], mesh.vertices[e[1]])
                clear_ok &= dist >= o - 1e-9
    out = []
    for j in range(n):
        path = W[j]
        out.append(CandidatePath(path, padded.channel.channel_id,
                                 fuel_cost(path, field, vehicle, alpha, k_exp),
                                 bool(turn_ok[j] and clear_ok[j]), polyline_length(path), j,
                                 bool(turn_ok[j]), bool(clear_ok[j])))
    return out


# --- selection -----------------------------------------------------------

def harmonic_mean(values):
    v = np.asarray(values, dtype=float)
    return float(len(v) / np.sum(1.0 / v))


def select_homotopy(candidates):
    """Channel id minimizing the harmonic mean of its feasible paths' fuel."""
    scores = channel_scores(candidates)
    if not scores:
        raise InfeasiblePlan("no feasible plan")
    return min(scores, key=lambda cid: (scores[cid], cid))


def channel_scores(candidates):
    scores = {}
    for cid, paths in candidates.items():
        fuels = [p.fuel for p in paths if p.feasible]
        if fuels:
            scores[cid] = harmonic_mean(fuels)
    return scores


def select_path(channel_paths):
    """Cheapest feasible path; ties go to the shorter, then the lower sample index."""
    feas = [p for p in channel_paths if p.feasible]
    if not feas:
        raise InfeasiblePlan("no feasible path in channel")
    return min(feas, key=lambda p: (p.fuel, p.length, p.index))


# --- metrics -------------------------------------------------------------

def safety_distance(path, obstacles):
    """Minimum distance from a polyline to any obstacle polygon (inf if none)."""
    if not len(obstacles):
        return math.inf
    pts = np.asarray(path, dtype=float)
    geom = LineString(pts) if len(pts) > 1 else LineString([pts[0], pts[0]])
    return float(geom.distance(MultiPolygon([Polygon(p) for p in obstacles])))


def path_metrics(path, env, alpha=1.0, k_exp=2.0, states=0, vehicle=None):
    vehicle = vehicle or env.vehicle
    fuel = fuel_cost(path, env.field, vehicle, alpha, k_exp)
    length = polyline_length(path)
    return {
        "fuel": fuel,
        "safety": safety_distance(path, env.obstacles),
        "length": length,
        "fd": fuel / length if length > 0 else math.nan,
        "states": int(states),
    }


# --- pipeline ------------------------------------------------------------

def pad_channel(channel, mesh, env, config, vehicle, cache=None):
    kind, d = parse_padding_scheme(config.padding)
    if kind == "adaptive":
        return compute_adaptive_padding(channel, mesh, env, vehicle, config.sigma, config.padding_samples,
                                        config.seed, config.heading_spread, pad_bounds=config.pad_bounds,
                                        cache=cache)
    if kind == "fixed" and d > 0:
        return fixed_padding(channel, d, mesh, env, config.pad_bounds)
    return no_padding(channel, mesh)


def plan(env, start, goal, config=None, vehicle=None, mesh=None, dual=None):
    """Mesh -> channels -> padding -> sampling -> homotopy choice -> path choice."""
    config = (config or PlanConfig()).validated()
    vehicle = vehicle or env.vehicle
    start = check_point(start, "start")
    goal = check_point(goal, "goal")
    mesh = mesh if mesh is not None else build_navmesh(env)
    dual = dual if dual is not None else build_dual(mesh)
    stats = EnumerationStats()
    channels = enumerate_channels(dual, mesh, start, goal, config.k, env.obstacles, stats=stats)
    if not channels:
        raise InfeasiblePlan("no feasible plan: start and goal are not connected")
    padded, candidates, blocked = {}, {}, []
    cache = {}
    for ch in channels:
        report = pad_channel(ch, mesh, env, config, vehicle, cache)
        pc = apply_padding(ch, report, mesh, vehicle.length)
        padded[ch.channel_id] = pc
        if not pc.feasible:
            blocked.append(ch.channel_id)
            logger.info("channel %d blocked by padding at passing edges %s", ch.channel_id, pc.blocked)
            continue
        candidates[ch.channel_id] = sample_paths(pc, start, goal, config.n_samples, env.field, vehicle,
                                                 config.seed, config.region_radius, mesh,
                                                 config.alpha, config.k_exp)
    scores = channel_scores(candidates)
    if not scores:
        raise InfeasiblePlan("no feasible plan: every channel is blocked or has no feasible path")
    best = select_homotopy(candidates)
    path = select_path(candidates[best])
    chosen = next(c for c in channels if c.channel_id == best)
    states = len(mesh.vertices) + stats.explored_nodes
    metrics = path_metrics(path.waypoints, env, config.alpha, config.k_exp, states, vehicle)
    diagnostics = {
        "n_channels": len(channels),
        "blocked_channels": blocked,
        "triangulation_vertices": int(len(mesh.vertices)),
        "explored_dual_nodes": int(stats.explored_nodes),
        "enumeration_truncated": bool(stats.truncated),
        "infeasible_counts": {
            str(cid): {
                "turn": int(sum(not p.turn_ok for p in ps)),
                "clearance": int(sum(not p.clearance_ok for p in ps)),
                "total": len(ps),
            } for cid, ps in sorted(candidates.items())
        },
    }
    return PlanResult(chosen, path, scores, candidates, metrics, channels, padded, diagnostics, mesh)


class RenewPlanner(BaseEstimator):
    """Estimator-style front end: ``fit`` meshes an environment, ``plan`` answers queries.

    Hyperparameters follow the sklearn convention (stored verbatim in
    ``__init__``) so the planner works with ``clone``, ``get_params`` and
    ``ParameterGrid`` sweeps.
    """

    def __init__(self, k=16, n_samples=500, sigma=0.95, alpha=1.0, drag_exp=2.0, region_radius=None,
                 padding="adaptive", padding_samples=DEFAULT_PADDING_SAMPLES, heading_spread_deg=30.0,
                 pad_bounds=True, seed=0):
        self.k = k
        self.n_samples = n_samples
        self.sigma = sigma
        self.alpha = alpha
        self.drag_exp = drag_exp
        self.region_radius = region_radius
        self.padding = padding
        self.padding_samples = padding_samples
        self.heading_spread_deg = heading_spread_deg
        self.pad_bounds = pad_bounds
        self.seed = seed

    def _config(self):
        return PlanConfig(self.k, self.n_samples, self.sigma, self.alpha, self.drag_exp, self.region_radius,
                          self.padding, self.padding_samples, math.radians(self.heading_spread_deg),
                          self.pad_bounds, self.seed).validated()

    def fit(self, env, y=None):
        check_environment(env)
        self._config()
        self.env_ = env
        self.mesh_ = build_navmesh(env)
        self.dual_ = build_dual(self.mesh_)
        return self

    def plan(self, start=None, goal=None):
        check_is_fitted(self, "mesh_")
        start = self.env_.start if start is None else start
        goal = self.env_.goal if goal is None else goal
        if start is None or goal is None:
            raise InvalidQuery("start and goal are required")
        return plan(self.env_, start, goal, self._config(), mesh=self.mesh_, dual=self.dual_)

    def predict(self, X):
        """Chosen waypoints for each ``(sx, sy, gx, gy)`` row of ``X``."""
        X = np.asarray(X, dtype=float).reshape(-1, 4)
        return [self.plan(row[:2], row[2:]).chosen_path.waypoints for row in X]


def with_config(config, **changes):
    return replace(config, **changes)
