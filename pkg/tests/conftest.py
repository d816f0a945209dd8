import math

import pytest

from symdetect.geometry import ImageBounds, Point, Segment
from symdetect.interchange import SOURCE_BUILTIN, SymmetryAxis


def seg(x1, y1, x2, y2):
    return Segment(Point(x1, y1), Point(x2, y2))


def axis(x1, y1, x2, y2, score, depth=0, source=SOURCE_BUILTIN):
    return SymmetryAxis(seg(x1, y1, x2, y2), score, depth=depth, source=source)


def through(cx, cy, angle_rad, half_len):
    """Axis segment centred on (cx, cy) with the given direction."""
    dx = half_len * math.cos(angle_rad)
    dy = half_len * math.sin(angle_rad)
    return seg(cx - dx, cy - dy, cx + dx, cy + dy)


@pytest.fixture
def bounds_256():
    return ImageBounds(256.0, 256.0)
