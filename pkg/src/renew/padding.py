"""Per-channel standoff offsets from constrained edges.

Adaptive offsets are the sigma-quantile of the best-effort encroachment
depth sampled with hard-over turns (see ``dynamics``). The inset is
realized by trimming every passing edge of the channel at both ends, so
waypoints sampled on the trimmed edges keep their standoff.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DEFAULT_HEADING_SPREAD, PADDING_DT, best_effort_distance_samples
from .env import local_current_stats
from .validation import check_probability

DEFAULT_PADDING_SAMPLES = 500


@dataclass(frozen=True)
class PaddingReport:
    per_edge: dict           # constrained edge id -> offset (m)
    sigma: float
    scheme: str              # "adaptive", "fixed:<d>", or "none"
    feasible: bool
    padded_passing_edges: tuple  # ((p, q), ...) trimmed segments
    n_samples: int = 0
    channel_id: int = 0
    clamped_edges: frozenset = frozenset()
    details: tuple = field(default=(), repr=False)  # (triangle, edge id, offset) per sampled pair

    def offset(self, edge_id):
        return self.per_edge.get(edge_id, 0.0)

    def to_rows(self, mesh):
        rows = []
        for e, eid in sorted(mesh.constrained_edge_ids.items(), key=lambda kv: kv[1]):
            if eid not in self.per_edge:
                continue
            a, b = mesh.vertices[e[0]], mesh.vertices[e[1]]
            rows.append({
                "channel": self.channel_id,
                "edge_id": eid,
                "x0": a[0], "y0": a[1], "x1": b[0], "y1": b[1],
                "offset": self.per_edge[eid],
                "sigma": self.sigma,
                "n_samples": self.n_samples,
                "scheme": self.scheme,
            })
        return rows


@dataclass(frozen=True)
class PaddedChannel:
    channel: object
    report: PaddingReport
    trimmed_edges: tuple     # ((p, q), ...) one per passing edge
    usable_lengths: tuple
    feasible: bool
    blocked: tuple = ()      # indices of passing edges too short for the hull


def is_bounds_edge(mesh, env, e):
    xmin, ymin, xmax, ymax = env.bounds
    a, b = mesh.vertices[e[0]], mesh.vertices[e[1]]
    for i, (lo, hi) in enumerate(((xmin, xmax), (ymin, ymax))):
        for val in (lo, hi):
            if abs(a[i] - val) < 1e-9 and abs(b[i] - val) < 1e-9:
                return True
    return False


def channel_midline_directions(channel, mesh):
    """Travel direction through each channel triangle (entry point to exit point)."""
    pts = channel.midline(mesh)
    out = []
    for i in range(len(channel.triangle_seq)):
        d = pts[i + 1] - pts[i]
        out.append(math.atan2(d[1], d[0]) if np.hypot(*d) > 0 else 0.0)
    return out


def relevant_edges(mesh, t, env=None, pad_bounds=True):
    """Constrained edges of triangle ``t`` or meeting one of its vertices."""
    out = set()
    for v in mesh.triangles[t]:
        for e in mesh.vertex_constrained_edges.get(int(v), ()):
            if not pad_bounds and env is not None and is_bounds_edge(mesh, env, e):
                continue
            out.add(e)
    return sorted(out)


def quantile(values, q):
    """Linear-interpolated order statistic."""
    return float(np.quantile(np.asarray(values, dtype=float), q, method="linear"))


def offset_from_samples(clearances, sigma):
    """Standoff such that a fraction ``sigma`` of best-effort turns stay clear."""
    return max(0.0, quantile(-np.asarray(clearances), sigma))


def _trim_amount(mesh, offsets, u, v):
    """Distance to cut from vertex ``u`` along passing edge u->v."""
    pu = mesh.vertices[u]
    d = mesh.vertices[v] - pu
    d = d / np.hypot(*d)
    need = 0.0
    for e in mesh.vertex_constrained_edges.get(int(u), ()):
        o = offsets.get(mesh.constrained_edge_ids[e], 0.0)
        if o <= 0:
            continue
        w = mesh.vertices[e[1] if e[0] == u else e[0]] - pu
        w = w / np.hypot(*w)
        cosb = float(np.clip(d @ w, -1.0, 1.0))
        if cosb <= 0:
            need = max(need, o)
        else:
            sinb = math.sqrt(max(0.0, 1.0 - cosb * cosb))
            need = max(need, o / sinb if sinb > 1e-12 else math.inf)
    return need


def trim_passing_edges(channel, mesh, offsets):
    segs, lengths = [], []
    for u, v in channel.passing_edges:
        pu, pv = mesh.vertices[u], mesh.vertices[v]
        L = float(np.hypot(*(pv - pu)))
        tu = _trim_amount(mesh, offsets, u, v)
        tv = _trim_amount(mesh, offsets, v, u)
        usable = L - tu - tv
        if usable > 0:
            d = (pv - pu) / L
            segs.append((pu + tu * d, pv - tv * d))
        else:
            mid = pu + (pv - pu) * (tu / (tu + tv) if math.isfinite(tu + tv) and tu + tv > 0 else 0.5)
            segs.append((mid, mid))
        lengths.append(usable)
    return tuple(segs), tuple(lengths)


def _finish_report(channel, mesh, per_edge, sigma, scheme, n_samples, clamped=frozenset(), details=()):
    segs, lengths = trim_passing_edges(channel, mesh, per_edge)
    feasible = all(L > 0 for L in lengths)
    return PaddingReport(dict(per_edge), sigma, scheme, feasible, segs, n_samples,
                         channel.channel_id, frozenset(clamped), tuple(details))


def compute_adaptive_padding(channel, mesh, env, vehicle=None, sigma=0.95, n_samples=DEFAULT_PADDING_SAMPLES,
                             seed=0, heading_spread=DEFAULT_HEADING_SPREAD, dt=PADDING_DT, pad_bounds=True,
                             cache=None):
    """Sigma-quantile standoff for every constrained edge around the channel.

    Each (triangle, edge) pair is sampled with the triangle's travel
    direction and local current statistics; an edge seen from several
    triangles keeps the largest offset. Sampling for a pair uses its own
    random substream derived from ``seed``. ``cache`` (a dict) shares
    samples between channels that see a pair with the same direction.
    """
    check_probability(sigma, "sigma")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    vehicle = vehicle or env.vehicle
    dirs = channel_midline_directions(channel, mesh)
    per_edge, details, clamped = {}, [], set()
    for i, t in enumerate(channel.triangle_seq):
        region = mesh.triangle_points(t)
        stats = local_current_stats(env.field, region)
        for e in relevant_edges(mesh, t, env, pad_bounds):
            seg = mesh.free_side_segment(e)
            if seg is None:
                continue
            eid = mesh.constrained_edge_ids[e]
            key = (int(seed), int(t), eid, dirs[i], n_samples, heading_spread, dt)
            clear = cache.get(key) if cache is not None else None
            if clear is None:
                rng = np.random.default_rng([int(seed), int(t), int(eid)])
                clear = best_effort_distance_samples(region, dirs[i], env.field, vehicle, seg, n_samples,
                                                     rng=rng, heading_spread=heading_spread, dt=dt, stats=stats)
                if cache is not None:
                    cache[key] = clear
            off = offset_from_samples(clear, sigma)
            details.append((int(t), eid, off))
            per_edge[eid] = max(per_edge.get(eid, 0.0), off)
    for e, eid in mesh.constrained_edge_ids.items():
        if eid in per_edge:
            for t in mesh.edge_triangles[e]:
                if mesh.triangle_labels[t] and per_edge[eid] > mesh.triangle_inradius(t):
                    clamped.add(eid)
    return _finish_report(channel, mesh, per_edge, sigma, "adaptive", n_samples, clamped, details)


def fixed_padding(channel, d, mesh, env=None, pad_bounds=True):
    """Uniform offset ``d`` on every constrained edge around the channel."""
    if d < 0:
        raise ValueError("fixed padding distance must be >= 0")
    per_edge = {}
    for t in channel.triangle_seq:
        for e in relevant_edges(mesh, t, env, pad_bounds):
            per_edge[mesh.constrained_edge_ids[e]] = float(d)
    scheme = "none" if d == 0 else f"fixed:{d:g}"
    return _finish_report(channel, mesh, per_edge, float("nan"), scheme, 0)


def no_padding(channel, mesh):
    return _finish_report(channel, mesh, {}, float("nan"), "none", 0)


def apply_padding(channel, report, mesh, vehicle_length=0.0):
    """Trim the channel's passing edges by the report's offsets.

    The channel is infeasible when any trimmed passing edge is no longer
    than the vehicle.
    """
    segs, lengths = trim_passing_edges(channel, mesh, report.per_edge)
    blocked = tuple(i for i, L in enumerate(lengths) if L <= vehicle_length)
    return PaddedChannel(channel, report, segs, lengths, not blocked, blocked)


def merge_edge_offsets(reports):
    """Largest offset per constrained edge over several channel reports."""
    out = {}
    for r in reports:
        for eid, o in r.per_edge.items():
            out[eid] = max(out.get(eid, 0.0), o)
    return out


def parse_padding_scheme(text):
    """``"adaptive"``, ``"none"``, or ``"fixed:<d>"`` -> (kind, distance)."""
    if isinstance(text, (int, float)):
        return "fixed", float(text)
    text = str(text).strip().lower()
    if text in ("adaptive", "none"):
        return text, 0.0
    if text.startswith("fixed:"):
        d = float(text.split(":", 1)[1])
        if d < 0:
            raise ValueError("fixed padding distance must be >= 0")
        return "fixed", d
    raise ValueError(f"unknown padding scheme {text!r} (use adaptive, none, or fixed:<d>)")


def encroachment_frequency(report, channel, mesh, env, vehicle=None, n_trials=2000, seed=12345,
                           heading_spread=DEFAULT_HEADING_SPREAD, dt=PADDING_DT):
    """Fraction of fresh hard-over trials that cross an edge from its padded standoff.

    Trials cycle over the report's sampled (triangle, edge) pairs. Each
    starts ``offset`` inside the edge (opposite the entry point used for
    sampling), heads along the triangle's travel direction within
    ``heading_spread``, and turns hard-over both ways under the full field
    rotated and rescaled by a fresh noise draw. A trial encroaches when both
    turns cross the edge's supporting line.
    """
    from .contingency import _PerturbedField
    from .dynamics import line_clearance, simulate_hard_over

    vehicle = vehicle or env.vehicle
    pairs = sorted({(t, eid) for t, eid, _ in report.details})
    if not pairs:
        return 0.0
    edges_by_id = {eid: e for e, eid in mesh.constrained_edge_ids.items()}
    dirs = dict(zip(channel.triangle_seq, channel_midline_directions(channel, mesh)))
    rng = np.random.default_rng(seed)
    fld = env.field
    hits = 0
    for k, (t, eid) in enumerate(pairs):
        n = n_trials // len(pairs) + (1 if k < n_trials % len(pairs) else 0)
        if n == 0:
            continue
        a, b = mesh.free_side_segment(edges_by_id[eid])
        d = b - a
        nrm = np.array([-d[1], d[0]]) / np.hypot(*d)
        c = mesh.triangle_points(t).mean(axis=0)
        s = np.clip(((c - a) @ d) / (d @ d), 0.0, 1.0)
        entry = a + s * d + report.per_edge.get(eid, 0.0) * nrm
        hdg = dirs[t] + rng.uniform(-heading_spread, heading_spread, n)
        dth = rng.normal(0.0, fld.noise_sigma_dir, n) if fld.noise_sigma_dir > 0 else np.zeros(n)
        dmag = rng.normal(0.0, fld.noise_sigma_mag, n) if fld.noise_sigma_mag > 0 else np.zeros(n)
        pf = _PerturbedField(fld, np.concatenate([dth, dth]), np.concatenate([dmag, dmag]))
        turns = np.concatenate([np.ones(n), -np.ones(n)])
        P = simulate_hard_over(np.broadcast_to(entry, (2 * n, 2)), np.concatenate([hdg, hdg]), turns,
                               vehicle, dt, field=pf)
        clear = line_clearance(P, a, b)
        hits += int(np.sum(np.maximum(clear[:n], clear[n:]) < 0))
    return hits / n_trials
