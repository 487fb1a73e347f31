"""Grid A* comparison planner (8-connected or fixed-turning-radius lattice) with shortcut smoothing."""

import heapq
import math
from dataclasses import dataclass

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import InvalidQuery
from .geometry import point_segment_distance, points_in_polygon
from .padding import parse_padding_scheme
from .planner import path_metrics
from .validation import check_environment, check_point, check_positive

FREE, OBSTACLE, PADDED = 0, 1, 2

# 16 lattice headings: unit steps, diagonals, and knight moves.
HEADING_OFFSETS = [(1, 0), (2, 1), (1, 1), (1, 2), (0, 1), (-1, 2), (-1, 1), (-2, 1),
                   (-1, 0), (-2, -1), (-1, -1), (-1, -2), (0, -1), (1, -2), (1, -1), (2, -1)]


@dataclass(frozen=True, eq=False)
class Grid:
    resolution: float
    occupancy: np.ndarray  # (ny, nx) of FREE / OBSTACLE / PADDED
    origin: tuple

    @property
    def dims(self):
        ny, nx = self.occupancy.shape
        return nx, ny

    def cell_of(self, x):
        i = int(math.floor((x[0] - self.origin[0]) / self.resolution))
        j = int(math.floor((x[1] - self.origin[1]) / self.resolution))
        nx, ny = self.dims
        return min(max(i, 0), nx - 1), min(max(j, 0), ny - 1)

    def center(self, i, j):
        return np.array([self.origin[0] + (i + 0.5) * self.resolution,
                         self.origin[1] + (j + 0.5) * self.resolution])

    def centers(self):
        nx, ny = self.dims
        xs = self.origin[0] + (np.arange(nx) + 0.5) * self.resolution
        ys = self.origin[1] + (np.arange(ny) + 0.5) * self.resolution
        X, Y = np.meshgrid(xs, ys)
        return X, Y

    def blocked_mask(self, allow=()):
        m = self.occupancy != FREE
        for i, j in allow:
            if self.occupancy[j, i] == PADDED:
                m[j, i] = False
        return m


def rasterize(env, resolution, padding_scheme="none", edge_offsets=None, mesh=None):
    """Occupancy grid: obstacle iff the cell center is inside a polygon.

    ``padding_scheme`` is ``"none"``, ``"fixed:<d>"`` (cells within ``d`` of
    an obstacle), or ``"adaptive"`` (cells within each constrained edge's
    offset from ``edge_offsets``, keyed by the mesh's edge ids).
    """
    check_positive(resolution, "resolution")
    xmin, ymin, xmax, ymax = env.bounds
    nx = int(math.ceil((xmax - xmin) / resolution - 1e-9))
    ny = int(math.ceil((ymax - ymin) / resolution - 1e-9))
    grid = Grid(resolution, np.zeros((ny, nx), dtype=np.int8), (xmin, ymin))
    X, Y = grid.centers()
    pts = np.column_stack([X.ravel(), Y.ravel()])
    occ = np.zeros(len(pts), dtype=np.int8)
    for poly in env.obstacles:
        occ[points_in_polygon(pts, poly)] = OBSTACLE
    kind, d = parse_padding_scheme(padding_scheme)
    free = occ == FREE
    if kind == "fixed" and d > 0 and len(env.obstacles):
        mp = MultiPolygon([Polygon(p) for p in env.obstacles])
        dist = shapely.distance(shapely.points(pts[free]), mp)
        idx = np.flatnonzero(free)[dist <= d]
        occ[idx] = PADDED
    elif kind == "adaptive":
        if edge_offsets is None or mesh is None:
            raise ValueError("adaptive padding needs edge_offsets and mesh")
        ids = mesh.constrained_edge_ids
        band = np.zeros(len(pts), dtype=bool)
        for e, eid in ids.items():
            o = edge_offsets.get(eid, 0.0)
            if o > 0:
                band |= point_segment_distance(pts, mesh.vertices[e[0]], mesh.vertices[e[1]]) <= o
        occ[free & band] = PADDED
    return Grid(resolution, occ.reshape(ny, nx), (xmin, ymin))


@dataclass(frozen=True, eq=False)
class GridPath:
    points: np.ndarray
    cost: float
    explored: int            # distinct search states generated (opened)
    cells: tuple = ()
    expanded: int = 0        # states popped and expanded


def _line_cells(grid, p, q):
    L = float(np.hypot(*(q - p)))
    n = max(2, int(math.ceil(L / (grid.resolution / 4.0))) + 1)
    t = np.linspace(0.0, 1.0, n)
    pts = p[None, :] + t[:, None] * (q - p)[None, :]
    i = np.floor((pts[:, 0] - grid.origin[0]) / grid.resolution).astype(int)
    j = np.floor((pts[:, 1] - grid.origin[1]) / grid.resolution).astype(int)
    nx, ny = grid.dims
    return np.clip(i, 0, nx - 1), np.clip(j, 0, ny - 1)


def line_free(grid, p, q, blocked=None):
    blocked = grid.blocked_mask() if blocked is None else blocked
    i, j = _line_cells(grid, np.asarray(p, float), np.asarray(q, float))
    return not blocked[j, i].any()


def _octile(a, b):
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    return max(dx, dy) + (math.sqrt(2) - 1) * min(dx, dy)


def _moves_8(grid, blocked, i, j):
    nx, ny = grid.dims
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)):
        ni, nj = i + di, j + dj
        if not (0 <= ni < nx and 0 <= nj < ny) or blocked[nj, ni]:
            continue
        if di and dj and (blocked[j, ni] or blocked[nj, i]):
            continue  # no corner cutting
        yield (ni, nj), math.hypot(di, dj)


def _swept_offsets(off):
    """Relative cells crossed when moving center-to-center by ``off``."""
    di, dj = off
    n = 4 * max(abs(di), abs(dj)) + 1
    cells = set()
    for t in np.linspace(0.0, 1.0, n + 1)[1:]:
        x, y = 0.5 + t * di, 0.5 + t * dj
        for cx in {math.floor(x - 1e-9), math.floor(x + 1e-9)}:
            for cy in {math.floor(y - 1e-9), math.floor(y + 1e-9)}:
                cells.add((cx, cy))
    cells.discard((0, 0))
    return tuple(sorted(cells))


def _lattice_turns(turn_radius_cells, n_headings):
    """Allowed heading changes: chord length / turn angle >= turn radius."""
    angles = [math.atan2(dj, di) for di, dj in HEADING_OFFSETS]
    lengths = [math.hypot(di, dj) for di, dj in HEADING_OFFSETS]
    allowed = {}
    for h in range(n_headings):
        out = []
        for dh in range(-(n_headings // 2) + 1, n_headings // 2):
            h2 = (h + dh) % n_headings
            dth = abs(math.remainder(angles[h2] - angles[h], 2 * math.pi))
            if dth < 1e-12 or lengths[h2] / dth >= turn_radius_cells - 1e-12:
                out.append(h2)
        allowed[h] = tuple(sorted(out))
    return allowed


def astar(grid, start, goal, motion="8", turn_radius=None):
    """A* on the grid; returns a GridPath or None when the goal is unreachable.

    ``motion="8"`` uses 8-connected moves with the octile heuristic.
    ``motion="dubins"`` searches (cell, heading) over 16 lattice headings
    whose successors respect ``turn_radius`` (Euclidean heuristic; octile
    overestimates knight moves). Cost is path length in meters.
    """
    start = check_point(start, "start")
    goal = check_point(goal, "goal")
    s = grid.cell_of(start)
    g = grid.cell_of(goal)
    for name, (i, j) in (("start", s), ("goal", g)):
        if grid.occupancy[j, i] == OBSTACLE:
            raise InvalidQuery(f"{name} cell {(i, j)} is blocked")
    blocked = grid.blocked_mask(allow=(s, g))
    res = grid.resolution
    explored = 0  # expansions; the reported state count is len(dist)
    if motion in ("8", "8-connected", 8):
        dist = {s: 0.0}
        parent = {s: None}
        heap = [(_octile(s, g), 0.0, s)]
        closed = set()
        while heap:
            f, d, c = heapq.heappop(heap)
            if c in closed:
                continue
            closed.add(c)
            explored += 1
            if c == g:
                break
            for nb, w in _moves_8(grid, blocked, *c):
                nd = d + w
                if nd < dist.get(nb, math.inf) - 1e-12:
                    dist[nb] = nd
                    parent[nb] = c
                    heapq.heappush(heap, (nd + _octile(nb, g), nd, nb))
        if g not in closed:
            return None
        cells = [g]
        while parent[cells[-1]] is not None:
            cells.append(parent[cells[-1]])
        cells.reverse()
        return _finish(grid, start, goal, cells, dist[g] * res, len(dist), explored)
    if motion != "dubins":
        raise ValueError(f"unknown motion model {motion!r}")
    if turn_radius is None:
        raise ValueError("dubins motion needs turn_radius")
    nh = len(HEADING_OFFSETS)
    turns = _lattice_turns(turn_radius / res, nh)
    swept = [_swept_offsets(o) for o in HEADING_OFFSETS]
    steplen = [math.hypot(*o) for o in HEADING_OFFSETS]
    nx, ny = grid.dims

    def h(c):
        return math.hypot(c[0] - g[0], c[1] - g[1])

    dist, parent, heap = {}, {}, []
    for hd in range(nh):
        st = (s[0], s[1], hd)
        dist[st] = 0.0
        parent[st] = None
        heapq.heappush(heap, (h(s), 0.0, st))
    closed = set()
    end = None
    while heap:
        f, d, st = heapq.heappop(heap)
        if st in closed:
            continue
        closed.add(st)
        explored += 1
        i, j, hd = st
        if (i, j) == g:
            end = st
            break
        for h2 in turns[hd]:
            di, dj = HEADING_OFFSETS[h2]
            ni, nj = i + di, j + dj
            if not (0 <= ni < nx and 0 <= nj < ny):
                continue
            ok = True
            for ci, cj in swept[h2]:
                xi, yj = i + ci, j + cj
                if not (0 <= xi < nx and 0 <= yj < ny) or blocked[yj, xi]:
                    ok = False
                    break
            if not ok:
                continue
            nst = (ni, nj, h2)
            nd = d + steplen[h2]
            if nd < dist.get(nst, math.inf) - 1e-12:
                dist[nst] = nd
                parent[nst] = st
                heapq.heappush(heap, (nd + h((ni, nj)), nd, nst))
    if end is None:
        return None
    cells = [end]
    while parent[cells[-1]] is not None:
        cells.append(parent[cells[-1]])
    cells.reverse()
    return _finish(grid, start, goal, [(c[0], c[1]) for c in cells], dist[end] * res, len(dist), explored)


def _finish(grid, start, goal, cells, cost, explored, expanded):
    # start and goal lie inside their end cells, so they stand in for those centers
    inner = [grid.center(i, j) for i, j in cells[1:-1]]
    pts = np.asarray([np.asarray(start, float)] + inner + [np.asarray(goal, float)])
    keep = np.concatenate([[True], np.linalg.norm(np.diff(pts, axis=0), axis=1) > 1e-12])
    return GridPath(pts[keep], cost, explored, tuple(cells), expanded)


def _drop_collinear(pts, tol=1e-9):
    out = [pts[0]]
    for k in range(1, len(pts) - 1):
        a, b, c = out[-1], pts[k], pts[k + 1]
        cr = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cr) > tol or np.dot(b - a, c - b) < 0:
            out.append(b)
    out.append(pts[-1])
    return np.asarray(out)


def shortcut_smooth(path, grid, seed=0, iterations=200):
    """Randomized shortcutting followed by one greedy line-of-sight pass.

    Every accepted shortcut replaces a sub-polyline with a straight,
    collision-free segment, so the output is never longer than the input.
    """
    pts = [np.asarray(p, dtype=float) for p in np.asarray(path, dtype=float)]
    if len(pts) <= 2:
        return np.asarray(pts)
    ends = (grid.cell_of(pts[0]), grid.cell_of(pts[-1]))
    blocked = grid.blocked_mask(allow=ends)
    rng = np.random.default_rng(seed)
    for _ in range(iterations):
        if len(pts) <= 2:
            break
        i, j = sorted(rng.choice(len(pts), 2, replace=False))
        if j - i < 2:
            continue
        if line_free(grid, pts[i], pts[j], blocked):
            pts = pts[:i + 1] + pts[j:]
    out = [pts[0]]
    i = 0
    while i < len(pts) - 1:
        j = len(pts) - 1
        while j > i + 1 and not line_free(grid, pts[i], pts[j], blocked):
            j -= 1
        out.append(pts[j])
        i = j
    return _drop_collinear(np.asarray(out))


@dataclass(eq=False)
class GridPlanResult:
    original: GridPath
    smoothed: np.ndarray
    metrics_original: dict
    metrics_smoothed: dict
    grid: Grid


class GridAStarPlanner(BaseEstimator):
    """Estimator-style grid A* baseline.

    ``fit(env)`` rasterizes; ``plan(start, goal)`` searches and smooths.
    Adaptive padding needs ``edge_offsets`` and ``mesh`` passed to ``fit``.
    """

    def __init__(self, resolution=2.0, motion="dubins", padding="none", smooth_iterations=200,
                 alpha=1.0, drag_exp=2.0, seed=0):
        self.resolution = resolution
        self.motion = motion
        self.padding = padding
        self.smooth_iterations = smooth_iterations
        self.alpha = alpha
        self.drag_exp = drag_exp
        self.seed = seed

    def fit(self, env, y=None, edge_offsets=None, mesh=None):
        check_environment(env)
        self.env_ = env
        self.grid_ = rasterize(env, self.resolution, self.padding, edge_offsets, mesh)
        return self

    def plan(self, start=None, goal=None):
        check_is_fitted(self, "grid_")
        env = self.env_
        start = env.start if start is None else start
        goal = env.goal if goal is None else goal
        r = env.vehicle.turn_radius
        gp = astar(self.grid_, start, goal, self.motion, turn_radius=r)
        if gp is None:
            return None
        sm = shortcut_smooth(gp.points, self.grid_, self.seed, self.smooth_iterations)
        mo = path_metrics(gp.points, env, self.alpha, self.drag_exp, gp.explored)
        ms = path_metrics(sm, env, self.alpha, self.drag_exp, gp.explored)
        return GridPlanResult(gp, sm, mo, ms, self.grid_)
