"""Channel enumeration over the dual graph and crossing-sequence signatures.

Each obstacle gets an anchor ray pointing in -y from an interior point.
A path's signature is the free-group word of signed ray crossings, reduced
by cancelling adjacent inverse pairs. Two paths with shared endpoints are
homotopic in the free space iff their reduced words match.
"""

import heapq
import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from shapely.geometry import Polygon

from .exceptions import InvalidQuery
from .geometry import as_points, points_in_polygon, polygon_centroid
from .mesh import locate_triangle

RAY_DIRECTION = (0.0, -1.0)
RAY_PERTURB = 1e-6


@dataclass(frozen=True)
class AnchorRay:
    origin: tuple
    direction: tuple


@dataclass(frozen=True)
class HomotopySignature:
    """Reduced crossing word; symbol ``+i`` / ``-i`` is ray ``i-1`` crossed left-to-right / right-to-left."""

    crossings: tuple = ()

    def __add__(self, other):
        return HomotopySignature(reduce_word(self.crossings + other.crossings))

    def __str__(self):
        if not self.crossings:
            return "e"
        return " ".join(f"r{abs(s)}" + ("" if s > 0 else "^-1") for s in self.crossings)


def reduce_word(word):
    out = []
    for s in word:
        if out and out[-1] == -s:
            out.pop()
        else:
            out.append(s)
    return tuple(out)


def anchor_rays(obstacles):
    """One downward ray per obstacle, anchored at an interior point.

    The centroid is used when it lies inside the polygon, otherwise a
    guaranteed-interior representative point. A ray that passes exactly
    through an obstacle vertex is rotated by a tiny angle.
    """
    rays = []
    all_vertices = np.concatenate([np.asarray(p) for p in obstacles]) if len(obstacles) else np.zeros((0, 2))
    for poly in obstacles:
        c = polygon_centroid(poly)
        if not points_in_polygon(c, poly)[0]:
            rp = Polygon(poly).representative_point()
            c = np.array([rp.x, rp.y])
        d = np.array(RAY_DIRECTION)
        for _ in range(8):
            rel = all_vertices - c
            side = d[0] * rel[:, 1] - d[1] * rel[:, 0]
            along = rel @ d
            if not np.any((np.abs(side) < 1e-12) & (along > 0)):
                break
            ang = math.atan2(d[1], d[0]) + RAY_PERTURB
            d = np.array([math.cos(ang), math.sin(ang)])
        rays.append(AnchorRay(tuple(c), tuple(d)))
    return tuple(rays)


def _segment_crossings(p0, p1, rays):
    """Signed crossings of segment p0->p1 with each ray, ordered along the segment."""
    hits = []
    for k, ray in enumerate(rays):
        o = np.asarray(ray.origin)
        d = np.asarray(ray.direction)
        # side > 0: left of the ray direction
        s0 = d[0] * (p0[1] - o[1]) - d[1] * (p0[0] - o[0])
        s1 = d[0] * (p1[1] - o[1]) - d[1] * (p1[0] - o[0])
        # half-open rule so a path vertex lying on the ray counts once
        if (s0 < 0 <= s1) or (s1 < 0 <= s0):
            t = s0 / (s0 - s1) if s0 != s1 else 0.0
            q = p0 + t * (p1 - p0)
            if (q - o) @ d >= 0:
                # moving from the ray's left side to its right side = +symbol
                sym = (k + 1) if s0 >= 0 > s1 else -(k + 1)
                hits.append((t, sym))
    hits.sort()
    return [s for _, s in hits]


def path_signature(path, obstacles=None, anchor_rays_=None):
    """Reduced crossing word of a polyline against the obstacles' anchor rays."""
    rays = anchor_rays_ if anchor_rays_ is not None else anchor_rays(obstacles)
    pts = as_points(path)
    word = []
    for p0, p1 in zip(pts[:-1], pts[1:]):
        word.extend(_segment_crossings(p0, p1, rays))
    return HomotopySignature(reduce_word(word))


@dataclass(frozen=True)
class Channel:
    triangle_seq: tuple
    passing_edges: tuple   # vertex-index pairs, one per consecutive triangle pair
    signature: HomotopySignature
    start: tuple
    goal: tuple
    channel_id: int = 0

    def __len__(self):
        return len(self.triangle_seq)

    def passing_segments(self, mesh):
        return [(mesh.vertices[u], mesh.vertices[v]) for u, v in self.passing_edges]

    def midline(self, mesh):
        """Start, passing-edge midpoints, goal."""
        pts = [np.asarray(self.start, dtype=float)]
        for a, b in self.passing_segments(mesh):
            pts.append((a + b) / 2.0)
        pts.append(np.asarray(self.goal, dtype=float))
        return np.asarray(pts)


@dataclass
class EnumerationStats:
    expanded_prefixes: int = 0
    explored_nodes: int = 0
    truncated: bool = False


def _bfs_hops(graph, target):
    dist = {target: 0}
    q = deque([target])
    while q:
        t = q.popleft()
        for n, _ in graph.neighbors(t):
            if n not in dist:
                dist[n] = dist[t] + 1
                q.append(n)
    return dist


def enumerate_channels(graph, mesh, start, goal, k, obstacles=None, max_prefix_visits=3,
                       max_expansions=200_000, stats=None):
    """Up to ``k`` channels with pairwise distinct homotopy signatures.

    Simple triangle sequences are explored shortest first (ties broken by
    the lexicographically smaller id sequence) and each homotopy class keeps
    the first sequence found. A search prefix is summarized by its last
    triangle and the reduced crossing word so far; at most
    ``max_prefix_visits`` prefixes per summary are expanded, which bounds
    the search on maps with many triangles.
    """
    if k < 1:
        raise InvalidQuery("k must be >= 1")
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    ts = locate_triangle(mesh, start)
    tg = locate_triangle(mesh, goal)
    if ts is None:
        raise InvalidQuery(f"start {tuple(start)} is not in free space")
    if tg is None:
        raise InvalidQuery(f"goal {tuple(goal)} is not in free space")
    stats = stats if stats is not None else EnumerationStats()
    if obstacles is None:
        obstacles = []
    n_obs = len(obstacles)
    rays = anchor_rays(obstacles)
    limit = min(k, 2 ** n_obs) if n_obs < 63 else k
    hops = _bfs_hops(graph, tg)
    if ts not in hops:
        return []

    centroid = {t: mesh.triangle_points(t).mean(axis=0) for t in graph.nodes}

    def step_word(t_from, e, t_to):
        a, b = mesh.vertices[e[0]], mesh.vertices[e[1]]
        m = (a + b) / 2.0
        return _segment_crossings(centroid[t_from], m, rays) + _segment_crossings(m, centroid[t_to], rays)

    def word_ok(word):
        if len(word) > 2 * n_obs + 2:
            return False
        counts = {}
        for s in word:
            counts[abs(s)] = counts.get(abs(s), 0) + 1
            if counts[abs(s)] > 2:
                return False
        return True

    w0 = reduce_word(_segment_crossings(start, centroid[ts], rays))
    # heap entries: (f = length + hops to goal, sequence, word, edges)
    heap = [(1 + hops[ts], (ts,), w0, ())]
    visits = {}
    explored = set()
    found = {}
    level, pending = None, []

    def flush():
        for seq, edges in sorted(pending):
            if len(found) >= limit:
                break
            mid = [start]
            mid += [(mesh.vertices[u] + mesh.vertices[v]) / 2.0 for u, v in edges]
            mid.append(goal)
            sig = path_signature(np.asarray(mid), anchor_rays_=rays)
            if sig not in found:
                found[sig] = (seq, edges)
        pending.clear()

    while heap:
        f, seq, word, edges = heapq.heappop(heap)
        if level is not None and f != level:
            flush()
            if len(found) >= limit:
                break
        level = f
        last = seq[-1]
        explored.add(last)
        stats.expanded_prefixes += 1
        if stats.expanded_prefixes > max_expansions:
            stats.truncated = True
            break
        if last == tg:
            pending.append((seq, edges))
            continue
        key = (last, word)
        visits[key] = visits.get(key, 0) + 1
        if visits[key] > max_prefix_visits:
            continue
        for nbr, e in graph.neighbors(last):
            if nbr in seq or nbr not in hops:
                continue
            w = reduce_word(word + tuple(step_word(last, e, nbr)))
            if not word_ok(w):
                continue
            heapq.heappush(heap, (len(seq) + 1 + hops[nbr], seq + (nbr,), w, edges + (e,)))
    if len(found) < limit:
        flush()
    stats.explored_nodes = len(explored)
    channels = []
    ordered = sorted(found.items(), key=lambda kv: (len(kv[1][0]), kv[1][0]))
    for cid, (sig, (seq, edges)) in enumerate(ordered[:limit]):
        channels.append(Channel(seq, edges, sig, tuple(start), tuple(goal), cid))
    return channels


def channel_contains(channel, path, mesh, samples_per_segment=32, tol=1e-9):
    """True iff every point of the polyline lies in the union of the channel's triangles.

    Segments are checked at evenly spaced points (boundary inclusive).
    """
    pts = as_points(path)
    if len(pts) > 1:
        t = np.linspace(0.0, 1.0, samples_per_segment + 1)[:-1]
        dense = (pts[:-1, None, :] + t[None, :, None] * (pts[1:] - pts[:-1])[:, None, :]).reshape(-1, 2)
        pts = np.vstack([dense, pts[-1:]])
    P = mesh.vertices[mesh.triangles[list(channel.triangle_seq)]]
    a, b, c = P[:, 0][None], P[:, 1][None], P[:, 2][None]
    x = pts[:, None, :]

    def cross(p, q):
        return (q[..., 0] - p[..., 0]) * (x[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (x[..., 0] - p[..., 0])

    scale = max(1.0, float(np.abs(mesh.vertices).max()))
    eps = tol * scale * scale
    inside = (cross(a, b) >= -eps) & (cross(b, c) >= -eps) & (cross(c, a) >= -eps)
    return bool(inside.any(axis=1).all())
