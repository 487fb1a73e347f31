import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from shapely.geometry import LineString, Point, Polygon

from renew.geometry import (orient, point_segment_distance, points_in_polygon, points_segments_distance,
                            polygon_area, polygon_centroid, polyline_length, polyline_point_at,
                            segment_segment_distance, segments_intersect, triangle_inradius, wrap_angle)

coord = st.integers(-50000, 50000).map(lambda i: i / 1000.0)  # avoid subnormal segments
point = st.tuples(coord, coord)


def test_area_sign_and_centroid():
    sq = np.array([[0, 0], [2, 0], [2, 2], [0, 2]], float)
    assert polygon_area(sq) == pytest.approx(4.0)
    assert polygon_area(sq[::-1]) == pytest.approx(-4.0)
    assert np.allclose(polygon_centroid(sq), [1, 1])


def test_points_in_polygon_matches_shapely():
    poly = np.array([[0, 0], [10, 0], [10, 10], [5, 4], [0, 10]], float)
    pts = np.random.default_rng(3).uniform(-1, 11, (400, 2))
    shp = Polygon(poly)
    expected = np.array([shp.contains(Point(p)) for p in pts])
    assert (points_in_polygon(pts, poly) == expected).all()


@given(point, point, point)
def test_point_segment_distance_matches_shapely(p, a, b):
    d = point_segment_distance(np.array([p]), np.array(a), np.array(b))[0]
    ref = Point(p).distance(LineString([a, b])) if a != b else Point(p).distance(Point(a))
    assert d == pytest.approx(ref, abs=1e-7)


def test_points_segments_distance_shape():
    pts = np.zeros((3, 2))
    sa = np.array([[1.0, -1.0], [0.0, 2.0]])
    sb = np.array([[1.0, 1.0], [3.0, 2.0]])
    d = points_segments_distance(pts, sa, sb)
    assert d.shape == (3, 2)
    assert np.allclose(d[:, 0], 1.0) and np.allclose(d[:, 1], 2.0)


@settings(max_examples=200)
@given(point, point, point, point)
def test_segments_intersect_and_distance_agree_with_shapely(p0, p1, q0, q1):
    if p0 == p1 or q0 == q1:
        return
    a, b = LineString([p0, p1]), LineString([q0, q1])
    ref = a.distance(b)
    got = segment_segment_distance(*(np.array(x) for x in (p0, p1, q0, q1)))
    assert got == pytest.approx(ref, abs=1e-6)
    if ref > 1e-6:
        assert not segments_intersect(*(np.array(x) for x in (p0, p1, q0, q1)))
    elif ref == 0 and a.crosses(b):
        assert segments_intersect(*(np.array(x) for x in (p0, p1, q0, q1)))


def test_orient_sign():
    assert orient((0, 0), (1, 0), (0, 1)) > 0
    assert orient((0, 0), (0, 1), (1, 0)) < 0


def test_polyline_helpers():
    path = np.array([[0, 0], [3, 0], [3, 4]], float)
    assert polyline_length(path) == pytest.approx(7.0)
    p, u = polyline_point_at(path, 5.0)
    assert np.allclose(p, [3, 2]) and np.allclose(u, [0, 1])
    p, u = polyline_point_at(path, 3.0)  # corner takes the outgoing tangent
    assert np.allclose(p, [3, 0]) and np.allclose(u, [0, 1])


def test_inradius_right_triangle():
    # 3-4-5 triangle: r = (a + b - c) / 2 = 1
    assert triangle_inradius(np.array([0, 0.]), np.array([3, 0.]), np.array([0, 4.])) == pytest.approx(1.0)


@given(st.floats(-100, 100, allow_nan=False))
def test_wrap_angle_range(theta):
    w = wrap_angle(theta)
    assert -math.pi <= w <= math.pi
    assert math.cos(w) == pytest.approx(math.cos(theta), abs=1e-9)
    assert math.sin(w) == pytest.approx(math.sin(theta), abs=1e-9)
