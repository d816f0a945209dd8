import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from symdetect.geometry import (ImageBounds, Point, Segment, angular_difference,
                                clip_line_to_rect, distance, extend_to_rect,
                                line_intersection, orientation,
                                point_to_line_distance, rotate_about,
                                segment_length)

from conftest import seg

finite = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)


def test_point_rejects_non_finite():
    with pytest.raises(ValueError):
        Point(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Point(0.0, float("inf"))


def test_segment_rejects_zero_length():
    with pytest.raises(ValueError):
        Segment(Point(1.0, 2.0), Point(1.0, 2.0))


def test_orientation_oracles():
    assert orientation(seg(0, 0, 1, 1)) == pytest.approx(math.pi / 4, abs=1e-12)
    assert orientation(seg(0, 0, 0, 5)) == pytest.approx(math.pi / 2, abs=1e-12)
    # arctangent of 1/2, hand-evaluated
    assert orientation(seg(0, 0, 2, 1)) == pytest.approx(0.4636476090008061, abs=1e-12)


def test_orientation_endpoint_swap_invariant():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x1, y1, x2, y2 = rng.uniform(-100, 100, 4)
        if (x1, y1) == (x2, y2):
            continue
        assert orientation(seg(x1, y1, x2, y2)) == pytest.approx(
            orientation(seg(x2, y2, x1, y1)), abs=1e-12)


def test_orientation_range():
    rng = np.random.default_rng(1)
    for _ in range(500):
        x1, y1, x2, y2 = rng.uniform(-100, 100, 4)
        if (x1, y1) == (x2, y2):
            continue
        assert 0.0 <= orientation(seg(x1, y1, x2, y2)) < math.pi


def test_angular_difference_oracles():
    assert angular_difference(math.pi / 4, 3 * math.pi / 4) == pytest.approx(
        math.pi / 2, abs=1e-12)
    assert angular_difference(0.7, 0.7) == 0.0
    # pi - 3.0, hand-evaluated
    assert angular_difference(0.1, 3.1) == pytest.approx(0.14159265358979312, abs=1e-12)


@given(st.floats(min_value=0, max_value=math.pi, exclude_max=True),
       st.floats(min_value=0, max_value=math.pi, exclude_max=True),
       st.floats(min_value=0, max_value=math.pi, exclude_max=True))
def test_angular_difference_metric(a, b, c):
    # symmetric, bounded, triangle inequality modulo pi
    ab = angular_difference(a, b)
    assert ab == angular_difference(b, a)
    assert 0.0 <= ab <= math.pi / 2 + 1e-12
    assert ab <= angular_difference(a, c) + angular_difference(c, b) + 1e-9


def test_angular_difference_zero_iff_equal():
    assert angular_difference(1.2, 1.2) == 0.0
    assert angular_difference(1.2, 1.2001) > 0.0


def test_line_intersection_oracles():
    p = line_intersection(seg(0, 0, 2, 2), seg(0, 2, 2, 0))
    assert (p.x, p.y) == pytest.approx((1.0, 1.0), abs=1e-12)
    assert line_intersection(seg(0, 0, 1, 0), seg(0, 1, 1, 1)) is None
    p = line_intersection(seg(0, 0, 4, 0), seg(1, -1, 1, 3))
    assert (p.x, p.y) == pytest.approx((1.0, 0.0), abs=1e-12)


def test_line_intersection_lies_on_both_lines():
    rng = np.random.default_rng(2)
    hits = 0
    while hits < 200:
        a = seg(*rng.uniform(-50, 50, 4))
        b = seg(*rng.uniform(-50, 50, 4))
        p = line_intersection(a, b)
        if p is None:
            continue
        hits += 1
        assert point_to_line_distance(p, a) < 1e-6
        assert point_to_line_distance(p, b) < 1e-6


def test_rotate_about_oracles():
    p = rotate_about(Point(1, 0), Point(0, 0), math.pi / 2)
    assert (p.x, p.y) == pytest.approx((0.0, 1.0), abs=1e-12)
    p = rotate_about(Point(5, 5), Point(5, 5), 1.234)
    assert (p.x, p.y) == (5.0, 5.0)
    # half turn about (1, 0), hand-evaluated
    p = rotate_about(Point(2, 0), Point(1, 0), math.pi)
    assert (p.x, p.y) == pytest.approx((0.0, 0.0), abs=1e-12)


@given(finite, finite, finite, finite,
       st.floats(min_value=-10, max_value=10, allow_nan=False))
def test_rotate_round_trip(px, py, cx, cy, theta):
    p = Point(px, py)
    c = Point(cx, cy)
    back = rotate_about(rotate_about(p, c, theta), c, -theta)
    assert abs(back.x - p.x) < 1e-9 * max(1.0, abs(px), abs(cx))
    assert abs(back.y - p.y) < 1e-9 * max(1.0, abs(py), abs(cy))


def test_segment_length_oracles():
    assert segment_length(seg(0, 0, 3, 4)) == 5.0
    assert segment_length(seg(0, 0, 1, 0)) == 1.0
    # hand-evaluated hypotenuse
    assert segment_length(seg(1, 1, 4, 5)) == 5.0


def test_length_invariant_under_rotation():
    rng = np.random.default_rng(3)
    for _ in range(100):
        s = seg(*rng.uniform(-100, 100, 4))
        c = Point(*rng.uniform(-100, 100, 2))
        theta = rng.uniform(-math.pi, math.pi)
        rotated = Segment(rotate_about(s.p1, c, theta), rotate_about(s.p2, c, theta))
        assert segment_length(rotated) == pytest.approx(segment_length(s), abs=1e-9)


def test_bounds():
    b = ImageBounds(10.0, 10.0)
    assert b.diagonal == pytest.approx(math.hypot(10, 10))
    assert b.contains(Point(0, 0)) and b.contains(Point(10, 10))
    assert not b.contains(Point(-0.1, 5))
    with pytest.raises(ValueError):
        ImageBounds(0.0, 10.0)


def test_clip_line_to_rect():
    b = ImageBounds(10.0, 10.0)
    s = clip_line_to_rect(5.0, 0.0, b)  # vertical line x = 5
    xs = sorted([s.p1.x, s.p2.x])
    ys = sorted([s.p1.y, s.p2.y])
    assert xs == pytest.approx([5.0, 5.0], abs=1e-9)
    assert ys == pytest.approx([0.0, 10.0], abs=1e-9)
    assert clip_line_to_rect(25.0, 0.0, b) is None  # misses the rectangle


def test_extend_to_rect_keeps_line():
    b = ImageBounds(100.0, 100.0)
    s = seg(40, 40, 60, 60)
    ext = extend_to_rect(s, b)
    assert segment_length(ext) > segment_length(s)
    for p in (s.p1, s.p2):
        assert point_to_line_distance(p, ext) < 1e-9
    assert b.contains(ext.p1) and b.contains(ext.p2)


def test_distance():
    assert distance(Point(0, 0), Point(3, 4)) == 5.0
