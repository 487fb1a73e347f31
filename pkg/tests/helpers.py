"""Shared scene builders and independent reference computations for the tests."""

import heapq
import math

import numpy as np
from shapely.geometry import MultiPoint

from renew.env import VehicleModel, make_environment, rasterize_field


def uniform_field(vx=0.0, vy=0.0, bounds=(0.0, 0.0, 100.0, 100.0), spacing=5.0, noise=(0.0, 0.0)):
    return rasterize_field("uniform", bounds, spacing, {"vx": vx, "vy": vy}, noise)


def box_env(obstacles=(), vx=0.0, vy=0.0, bounds=(0.0, 0.0, 100.0, 100.0), spacing=5.0, noise=(0.0, 0.0),
            start=None, goal=None, name="box"):
    fld = uniform_field(vx, vy, bounds, spacing, noise)
    return make_environment(bounds, list(obstacles), fld, name, VehicleModel(), start, goal)


def square(cx, cy, half):
    return [[cx - half, cy - half], [cx + half, cy - half], [cx + half, cy + half], [cx - half, cy + half]]


def random_convex_obstacles(rng, n, bounds=(0.0, 0.0, 100.0, 100.0), cells=4):
    """``n`` random convex polygons, each inside its own grid cell so none overlap."""
    xmin, ymin, xmax, ymax = bounds
    w = (xmax - xmin) / cells
    h = (ymax - ymin) / cells
    picks = rng.choice(cells * cells, size=n, replace=False)
    polys = []
    for c in picks:
        i, j = divmod(int(c), cells)
        x0, y0 = xmin + i * w, ymin + j * h
        pts = np.column_stack([rng.uniform(x0 + 0.15 * w, x0 + 0.85 * w, 7),
                               rng.uniform(y0 + 0.15 * h, y0 + 0.85 * h, 7)])
        hull = np.asarray(MultiPoint([tuple(p) for p in np.round(pts, 6)]).convex_hull.exterior.coords)[:-1]
        polys.append(hull.tolist())
    return polys


# --- closed forms --------------------------------------------------------

def straight_fuel(length, v, c_along, alpha=1.0, k_exp=2.0):
    """Fuel of a straight path under a uniform current with along-track component ``c_along``."""
    return alpha * v ** k_exp * length / (v + c_along)


def trochoid(p0, theta0, v, omega, c, t):
    """Exact solution of p' = v (cos th, sin th) + c, th' = omega."""
    t = np.asarray(t, dtype=float)
    if omega == 0:
        x = p0[0] + (v * math.cos(theta0) + c[0]) * t
        y = p0[1] + (v * math.sin(theta0) + c[1]) * t
    else:
        r = v / omega
        x = p0[0] + r * (np.sin(theta0 + omega * t) - math.sin(theta0)) + c[0] * t
        y = p0[1] - r * (np.cos(theta0 + omega * t) - math.cos(theta0)) + c[1] * t
    return np.column_stack([x, y])


def euler_free_triangles(n_vertices, n_holes):
    """Triangles in a triangulation of a polygon with holes using only its n vertices."""
    return n_vertices + 2 * n_holes - 2


def hand_harmonic_mean(values):
    return len(values) / sum(1.0 / v for v in values)


def dijkstra_8(blocked, s, g):
    """Plain Dijkstra on an 8-connected grid without corner cutting; cost in cells."""
    ny, nx = blocked.shape
    dist = {s: 0.0}
    heap = [(0.0, s)]
    done = set()
    while heap:
        d, c = heapq.heappop(heap)
        if c in done:
            continue
        done.add(c)
        if c == g:
            return d
        i, j = c
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == dj == 0:
                    continue
                ni, nj = i + di, j + dj
                if not (0 <= ni < nx and 0 <= nj < ny) or blocked[nj, ni]:
                    continue
                if di and dj and (blocked[j, ni] or blocked[nj, i]):
                    continue
                nd = d + math.hypot(di, dj)
                if nd < dist.get((ni, nj), math.inf):
                    dist[(ni, nj)] = nd
                    heapq.heappush(heap, (nd, (ni, nj)))
    return None
