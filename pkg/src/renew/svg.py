"""Minimal SVG figures: obstacles, padded bands, channels, paths, mesh, collision sites."""

import datetime
from xml.sax.saxutils import escape

import numpy as np
import shapely
from shapely.geometry import LineString, Polygon

OBSTACLE_FILL = "#6b6b6b"
PADDING_FILL = "#f2b872"
CHANNEL_STROKE = "#7aa6d6"
PATH_COLORS = ("#c0392b", "#27ae60", "#8e44ad", "#2c3e50")


def _num(v):
    return format(float(v), ".6g")


class Figure:
    """World-coordinate canvas; y points up in the world and down in SVG."""

    def __init__(self, bounds, width=640, title=None):
        xmin, ymin, xmax, ymax = bounds
        self.bounds = bounds
        self.scale = width / (xmax - xmin)
        self.width = width
        self.height = (ymax - ymin) * self.scale
        self.title = title
        self.items = []

    def _xy(self, p):
        xmin, _, _, ymax = self.bounds
        return (p[0] - xmin) * self.scale, (ymax - p[1]) * self.scale

    def _points(self, pts):
        return " ".join(f"{_num(x)},{_num(y)}" for x, y in (self._xy(p) for p in pts))

    def polygon(self, pts, fill, stroke="none", opacity=1.0, width=1.0):
        self.items.append(f'<polygon points="{self._points(pts)}" fill="{fill}" fill-opacity="{_num(opacity)}" '
                          f'stroke="{stroke}" stroke-width="{_num(width)}"/>')

    def polyline(self, pts, stroke, width=2.0, dash=None, opacity=1.0):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<polyline points="{self._points(pts)}" fill="none" stroke="{stroke}" '
                          f'stroke-width="{_num(width)}" stroke-opacity="{_num(opacity)}"{d}/>')

    def circle(self, p, r_px, fill, stroke="none"):
        x, y = self._xy(p)
        self.items.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="{_num(r_px)}" fill="{fill}" stroke="{stroke}"/>')

    def text(self, p, s, size=10):
        x, y = self._xy(p)
        self.items.append(f'<text x="{_num(x)}" y="{_num(y)}" font-size="{size}" '
                          f'font-family="sans-serif">{escape(str(s))}</text>')

    def geometry(self, geom, fill, opacity=1.0):
        if geom.is_empty:
            return
        parts = getattr(geom, "geoms", [geom])
        for g in parts:
            if isinstance(g, Polygon) and not g.is_empty:
                self.polygon(np.asarray(g.exterior.coords)[:-1], fill, opacity=opacity)

    def render(self, timestamp=False):
        head = ['<?xml version="1.0" encoding="UTF-8"?>']
        if timestamp:
            head.append(f"<!-- generated {datetime.datetime.now(datetime.timezone.utc).isoformat()} -->")
        head.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(self.width)}" '
                    f'height="{_num(self.height)}" viewBox="0 0 {_num(self.width)} {_num(self.height)}">')
        if self.title:
            head.append(f"<title>{escape(self.title)}</title>")
        head.append(f'<rect x="0" y="0" width="{_num(self.width)}" height="{_num(self.height)}" '
                    f'fill="#eef5fb" stroke="#333"/>')
        return "\n".join(head + self.items + ["</svg>", ""])


def padded_band_geometry(mesh, env, offsets):
    """Union of one-sided bands of width ``offset`` on the free side of each padded edge."""
    edges = {eid: e for e, eid in mesh.constrained_edge_ids.items()}
    bands = []
    for eid, off in sorted(offsets.items()):
        if off <= 0 or eid not in edges:
            continue
        seg = mesh.free_side_segment(edges[eid])
        if seg is None:
            continue
        a, b = seg
        bands.append(LineString([tuple(a), tuple(b)]).buffer(float(off), single_sided=True))
    if not bands:
        return Polygon()
    band = shapely.union_all(bands)
    obstacles = shapely.union_all(env.shapely_obstacles()) if len(env.obstacles) else Polygon()
    box = shapely.box(*env.bounds)
    return band.difference(obstacles).intersection(box)


def draw_environment(fig, env, offsets=None, mesh=None):
    if offsets and mesh is not None:
        fig.geometry(padded_band_geometry(mesh, env, offsets), PADDING_FILL, opacity=0.8)
    for poly in env.obstacles:
        fig.polygon(poly, OBSTACLE_FILL, stroke="#333", width=0.8)


def draw_channel(fig, channel, mesh, stroke=CHANNEL_STROKE):
    for t in channel.triangle_seq:
        fig.polygon(mesh.triangle_points(t), "none", stroke=stroke, width=0.6)
    fig.polyline(channel.midline(mesh), stroke, width=0.8, dash="3,2", opacity=0.8)


def draw_endpoints(fig, start, goal):
    if start is not None:
        fig.circle(start, 4, "#2e86c1")
    if goal is not None:
        fig.circle(goal, 4, "#f1c40f", stroke="#333")


def draw_mesh(fig, mesh):
    for t, tri in enumerate(mesh.triangles):
        fill = "#ffffff" if mesh.triangle_labels[t] else OBSTACLE_FILL
        fig.polygon(mesh.vertices[tri], fill, stroke="#999", opacity=0.9, width=0.5)
    for u, v in mesh.constrained_edge_list:
        fig.polyline([mesh.vertices[u], mesh.vertices[v]], "#111", width=1.8)
    for t in mesh.free_ids:
        fig.text(mesh.triangle_points(t).mean(axis=0), t, size=7)


def write_svg(path, fig, timestamp=False):
    with open(path, "w") as fh:
        fh.write(fig.render(timestamp))
