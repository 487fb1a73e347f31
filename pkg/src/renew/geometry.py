"""Small vectorized planar geometry helpers shared across modules."""

import numpy as np


def as_points(x):
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, 2)
    return pts


def polygon_area(poly):
    """Signed shoelace area; positive for counter-clockwise vertex order."""
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_centroid(poly):
    p = np.asarray(poly, dtype=float)
    x, y = p[:, 0], p[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = cross.sum() / 2.0
    if abs(a) < 1e-15:
        return p.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def points_in_polygon(points, poly):
    """Even-odd rule membership test for many points against one polygon.

    Points exactly on the boundary may land on either side; callers that
    care about the boundary use a distance test as well.
    """
    pts = as_points(points)
    p = np.asarray(poly, dtype=float)
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    x0, y0 = p[:, 0][None, :], p[:, 1][None, :]
    x1, y1 = np.roll(p[:, 0], -1)[None, :], np.roll(p[:, 1], -1)[None, :]
    straddle = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    hits = straddle & (x < xint)
    return (hits.sum(axis=1) % 2) == 1


def point_segment_distance(points, a, b):
    """Euclidean distance from each point to the closed segment ab."""
    pts = as_points(points)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return np.linalg.norm(pts - a, axis=1)
    t = np.clip(((pts - a) @ d) / dd, 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.linalg.norm(pts - proj, axis=1)


def points_segments_distance(points, seg_a, seg_b):
    """Distance matrix (n_points, n_segments) to a batch of segments."""
    pts = as_points(points)
    sa = np.asarray(seg_a, dtype=float).reshape(-1, 2)
    sb = np.asarray(seg_b, dtype=float).reshape(-1, 2)
    d = sb - sa
    dd = np.einsum("ij,ij->i", d, d)
    dd = np.where(dd == 0.0, 1.0, dd)
    rel = pts[:, None, :] - sa[None, :, :]
    t = np.clip(np.einsum("nij,ij->ni", rel, d) / dd, 0.0, 1.0)
    proj = sa[None, :, :] + t[..., None] * d[None, :, :]
    return np.linalg.norm(pts[:, None, :] - proj, axis=2)


def segment_segment_distance(p0, p1, q0, q1):
    """Minimum distance between two closed segments."""
    if segments_intersect(p0, p1, q0, q1):
        return 0.0
    return float(min(
        point_segment_distance(p0, q0, q1)[0],
        point_segment_distance(p1, q0, q1)[0],
        point_segment_distance(q0, p0, p1)[0],
        point_segment_distance(q1, p0, p1)[0],
    ))


def orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_intersect(p0, p1, q0, q1):
    d1 = orient(q0, q1, p0)
    d2 = orient(q0, q1, p1)
    d3 = orient(p0, p1, q0)
    d4 = orient(p0, p1, q1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True

    def on_seg(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    if d1 == 0 and on_seg(q0, q1, p0):
        return True
    if d2 == 0 and on_seg(q0, q1, p1):
        return True
    if d3 == 0 and on_seg(p0, p1, q0):
        return True
    if d4 == 0 and on_seg(p0, p1, q1):
        return True
    return False


def polyline_length(path):
    p = np.asarray(path, dtype=float)
    if len(p) < 2:
        return 0.0
    return float(np.linalg.norm(np.diff(p, axis=0), axis=1).sum())


def polyline_point_at(path, s):
    """Point and outgoing unit tangent at arc length ``s`` along ``path``.

    At an interior vertex the tangent of the outgoing segment is returned.
    """
    p = np.asarray(path, dtype=float)
    seg = np.diff(p, axis=0)
    lens = np.linalg.norm(seg, axis=1)
    keep = lens > 0
    p0 = p[:-1][keep]
    seg, lens = seg[keep], lens[keep]
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    i = int(np.searchsorted(cum, s, side="right") - 1)
    i = min(max(i, 0), len(lens) - 1)
    u = seg[i] / lens[i]
    return p0[i] + (s - cum[i]) * u, u


def triangle_inradius(a, b, c):
    la = np.linalg.norm(np.subtract(b, c))
    lb = np.linalg.norm(np.subtract(a, c))
    lc = np.linalg.norm(np.subtract(a, b))
    area = abs(orient(a, b, c)) / 2.0
    s = (la + lb + lc) / 2.0
    return area / s if s > 0 else 0.0


def wrap_angle(theta):
    """Map angles to (-pi, pi]."""
    t = np.asarray(theta, dtype=float)
    out = np.pi - np.mod(np.pi - t, 2.0 * np.pi)
    return float(out) if out.ndim == 0 else out
