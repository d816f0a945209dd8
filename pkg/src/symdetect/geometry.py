"""Exact 2D primitives: points, segments, orientations, intersections, rotations.

Raster coordinate convention throughout the package: origin at the top-left
corner of the image, x grows rightward, y grows downward. Undirected line
orientations are radians in [0, pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Orientations closer than this (radians) count as parallel when intersecting.
PARALLEL_EPSILON = 1e-4


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True)
class Segment:
    p1: Point
    p2: Point

    def __post_init__(self) -> None:
        if self.p1.x == self.p2.x and self.p1.y == self.p2.y:
            raise ValueError(f"zero-length segment at ({self.p1.x}, {self.p1.y})")

    @property
    def midpoint(self) -> Point:
        return Point((self.p1.x + self.p2.x) / 2.0, (self.p1.y + self.p2.y) / 2.0)


@dataclass(frozen=True)
class ImageBounds:
    """The axis-aligned image rectangle [0, width] x [0, height]."""

    width: float
    height: float

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"empty image bounds {self.width}x{self.height}")

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, p: Point) -> bool:
        return 0.0 <= p.x <= self.width and 0.0 <= p.y <= self.height


def orientation(s: Segment) -> float:
    """Angle of the undirected supporting line, in [0, pi). Vertical maps to pi/2."""
    ang = math.atan2(s.p2.y - s.p1.y, s.p2.x - s.p1.x) % math.pi
    # A direction infinitesimally below the x axis rounds to pi under the
    # modulus; fold it back onto the equivalent 0.
    return 0.0 if ang >= math.pi else ang


def angular_difference(a: float, b: float) -> float:
    """Smallest angle between two undirected orientations, in [0, pi/2]."""
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


def segment_length(s: Segment) -> float:
    return math.hypot(s.p2.x - s.p1.x, s.p2.y - s.p1.y)


def line_intersection(a: Segment, b: Segment) -> Point | None:
    """Intersection of the two infinite supporting lines, or None when
    the orientations are within PARALLEL_EPSILON of parallel."""
    if angular_difference(orientation(a), orientation(b)) < PARALLEL_EPSILON:
        return None
    x1, y1 = a.p1.x, a.p1.y
    dx1, dy1 = a.p2.x - x1, a.p2.y - y1
    x2, y2 = b.p1.x, b.p1.y
    dx2, dy2 = b.p2.x - x2, b.p2.y - y2
    den = dx1 * dy2 - dy1 * dx2
    t = ((x2 - x1) * dy2 - (y2 - y1) * dx2) / den
    return Point(x1 + t * dx1, y1 + t * dy1)


def rotate_about(p: Point, center: Point, theta: float) -> Point:
    """Rigid rotation of p about center by the signed angle theta."""
    c, s = math.cos(theta), math.sin(theta)
    dx, dy = p.x - center.x, p.y - center.y
    return Point(center.x + c * dx - s * dy, center.y + s * dx + c * dy)


def rotate_segment(seg: Segment, center: Point, theta: float) -> Segment:
    return Segment(rotate_about(seg.p1, center, theta), rotate_about(seg.p2, center, theta))


def point_to_line_distance(p: Point, s: Segment) -> float:
    """Perpendicular distance from p to the infinite line through s."""
    dx, dy = s.p2.x - s.p1.x, s.p2.y - s.p1.y
    return abs((p.x - s.p1.x) * dy - (p.y - s.p1.y) * dx) / math.hypot(dx, dy)


def distance(a: Point, b: Point) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def clip_line_to_rect(rho: float, theta: float, bounds: ImageBounds) -> Segment | None:
    """Clip the infinite line x*cos(theta) + y*sin(theta) = rho to bounds.

    Returns None when the line misses the rectangle or only grazes a corner.
    """
    nx, ny = math.cos(theta), math.sin(theta)
    px, py = rho * nx, rho * ny  # closest point of the line to the origin
    dx, dy = -ny, nx  # unit direction along the line
    t0, t1 = -math.inf, math.inf
    for p, d, hi in ((px, dx, bounds.width), (py, dy, bounds.height)):
        if abs(d) < 1e-12:
            if p < -1e-9 or p > hi + 1e-9:
                return None
            continue
        ta, tb = (0.0 - p) / d, (hi - p) / d
        if ta > tb:
            ta, tb = tb, ta
        t0, t1 = max(t0, ta), min(t1, tb)
    if not math.isfinite(t0) or not (t1 - t0 > 1e-9):
        return None

    def at(t: float) -> Point:
        return Point(
            min(max(px + t * dx, 0.0), bounds.width),
            min(max(py + t * dy, 0.0), bounds.height),
        )

    return Segment(at(t0), at(t1))


def extend_to_rect(s: Segment, bounds: ImageBounds) -> Segment | None:
    """Extend the supporting line of s and clip it to the bounds rectangle."""
    alpha = orientation(s)
    tn = alpha + math.pi / 2.0
    rho = s.p1.x * math.cos(tn) + s.p1.y * math.sin(tn)
    return clip_line_to_rect(rho, tn, bounds)
