"""Constrained Delaunay triangulation of the world and its dual graph.

Triangulation is delegated to Shewchuk's Triangle (robust adaptive
predicates) in PSLG mode without quality refinement, so the only vertices
are the bounds corners, the obstacle vertices, and whatever Triangle needs
to resolve intersecting constraints.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import triangle as tr

from .exceptions import InvalidEnvironment
from .geometry import points_in_polygon, polygon_area, triangle_inradius

DEDUP_TOL = 1e-9


def edge_key(u, v):
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True, eq=False)
class NavMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    constrained_edges: frozenset
    triangle_labels: np.ndarray  # True = free water, False = hole (inside an obstacle)
    n_input_vertices: int = 0

    @property
    def n_triangles(self):
        return len(self.triangles)

    @cached_property
    def free_ids(self):
        return tuple(int(t) for t in np.flatnonzero(self.triangle_labels))

    @cached_property
    def edge_triangles(self):
        """Map from undirected edge key to the ids of the triangles using it."""
        out = {}
        for t, (a, b, c) in enumerate(self.triangles.tolist()):
            for u, v in ((a, b), (b, c), (c, a)):
                out.setdefault(edge_key(u, v), []).append(t)
        return out

    @cached_property
    def constrained_edge_ids(self):
        """Stable integer ids for constrained edges (sorted by vertex pair)."""
        return {e: i for i, e in enumerate(sorted(self.constrained_edges))}

    @cached_property
    def constrained_edge_list(self):
        return sorted(self.constrained_edges)

    @cached_property
    def vertex_constrained_edges(self):
        out = {}
        for e in self.constrained_edge_list:
            out.setdefault(e[0], []).append(e)
            out.setdefault(e[1], []).append(e)
        return out

    def is_constrained(self, u, v):
        return edge_key(u, v) in self.constrained_edges

    def triangle_points(self, t):
        return self.vertices[self.triangles[t]]

    def triangle_area(self, t):
        return abs(polygon_area(self.triangle_points(t)))

    def triangle_inradius(self, t):
        return triangle_inradius(*self.triangle_points(t))

    def free_side_segment(self, e):
        """Segment endpoints of constrained edge ``e`` ordered with free water on the left.

        Returns ``None`` when neither side of the edge is a free triangle.
        """
        for t in self.edge_triangles.get(e, []):
            if not self.triangle_labels[t]:
                continue
            a, b, c = self.triangles[t]
            ring = [a, b, c]
            for k in range(3):
                u, v = ring[k], ring[(k + 1) % 3]
                if edge_key(u, v) == e:
                    # triangles are CCW, so the triangle interior is left of u->v
                    return self.vertices[u], self.vertices[v]
        return None


def _dedup_vertices(points, tol=DEDUP_TOL):
    uniq = []
    index = []
    for p in points:
        hit = -1
        if uniq:
            d = np.abs(np.asarray(uniq) - p).max(axis=1)
            k = int(np.argmin(d))
            if d[k] <= tol:
                hit = k
        if hit < 0:
            uniq.append(np.asarray(p, dtype=float))
            hit = len(uniq) - 1
        index.append(hit)
    return np.asarray(uniq), index


def build_navmesh(env):
    """Triangulate the bounds rectangle with every obstacle edge constrained."""
    pts = [np.asarray(p) for p in env.bounds_polygon()]
    rings = [list(range(4))]
    for k, poly in enumerate(env.obstacles):
        if len(poly) < 3 or abs(polygon_area(poly)) < 1e-12:
            raise InvalidEnvironment(f"obstacle {k}: degenerate polygon")
        start = len(pts)
        pts.extend(np.asarray(poly))
        rings.append(list(range(start, start + len(poly))))
    verts, index = _dedup_vertices(pts)
    segs = []
    seen = set()
    for k, ring in enumerate(rings):
        ids = [index[i] for i in ring]
        if len(set(ids)) != len(ids):
            raise InvalidEnvironment(f"obstacle {k - 1}: duplicate vertices")
        for a, b in zip(ids, ids[1:] + ids[:1]):
            key = edge_key(a, b)
            if key not in seen:
                seen.add(key)
                segs.append(key)
    out = tr.triangulate({"vertices": verts, "segments": np.asarray(segs, dtype=np.int32)}, "pQ")
    V = np.asarray(out["vertices"], dtype=float)
    T = np.asarray(out["triangles"], dtype=np.int64)
    # enforce CCW
    a, b, c = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    cw = ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])) < 0
    T[cw] = T[cw][:, [0, 2, 1]]
    constrained = frozenset(edge_key(int(u), int(v)) for u, v in out["segments"])
    centroids = V[T].mean(axis=1)
    free = np.ones(len(T), dtype=bool)
    for poly in env.obstacles:
        free &= ~points_in_polygon(centroids, poly)
    V.setflags(write=False)
    T.setflags(write=False)
    free.setflags(write=False)
    return NavMesh(V, T, constrained, free, n_input_vertices=len(verts))


@dataclass(frozen=True)
class DualGraph:
    nodes: tuple
    adjacency: dict  # node -> tuple of (neighbor, passing edge key), ascending neighbor id
    edges: tuple     # (t1, t2, edge key) with t1 < t2

    def neighbors(self, t):
        return self.adjacency.get(t, ())


def build_dual(mesh):
    """One node per free triangle; one edge per shared unconstrained edge."""
    nodes = mesh.free_ids
    adj = {t: [] for t in nodes}
    edges = []
    for e, tris in sorted(mesh.edge_triangles.items()):
        if e in mesh.constrained_edges or len(tris) != 2:
            continue
        t1, t2 = sorted(tris)
        if not (mesh.triangle_labels[t1] and mesh.triangle_labels[t2]):
            continue
        adj[t1].append((t2, e))
        adj[t2].append((t1, e))
        edges.append((t1, t2, e))
    adjacency = {t: tuple(sorted(v)) for t, v in adj.items()}
    return DualGraph(nodes, adjacency, tuple(sorted(edges)))


def locate_triangle(mesh, x, tol=1e-9):
    """Lowest-id free triangle containing ``x`` (boundary inclusive), else None."""
    x = np.asarray(x, dtype=float)
    ids = np.asarray(mesh.free_ids)
    if len(ids) == 0:
        return None
    P = mesh.vertices[mesh.triangles[ids]]
    a, b, c = P[:, 0], P[:, 1], P[:, 2]

    def cross(p, q, r):
        return (q[:, 0] - p[:, 0]) * (r[1] - p[:, 1]) - (q[:, 1] - p[:, 1]) * (r[0] - p[:, 0])

    scale = max(1.0, float(np.abs(mesh.vertices).max()))
    eps = tol * scale * scale
    inside = (cross(a, b, x) >= -eps) & (cross(b, c, x) >= -eps) & (cross(c, a, x) >= -eps)
    hits = ids[inside]
    return int(hits.min()) if len(hits) else None
