"""Recursive localization: cut the image along its strongest retained axes,
re-run detection in each half, and remap results to global coordinates.

Each retained axis splits its frame into two half-planes; a half-plane is
materialized as the axis-aligned bounding box of its polygon, clipped to the
frame, so the detector keeps its rectangular-raster contract. Sibling frames
may overlap (duplicate axes are removed downstream). Halves thinner than
MIN_SUBIMAGE_SIDE carry too little gradient statistics and are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

from .detector import ImageRaster
from .errors import ValidationError
from .geometry import ImageBounds, Point, Segment
from .interchange import PipelineConfig, SymmetryAxis
from .refine import dedup_axes, filter_axes

MIN_SUBIMAGE_SIDE = 32
CUT_AXES_PER_NODE = 3

Detector = Callable[[ImageRaster], list[SymmetryAxis]]


@dataclass(frozen=True)
class SubImageFrame:
    """A rectangular sub-region of the original image, in global pixels."""

    offset: Point
    width: int
    height: int
    depth: int
    parent_axis: SymmetryAxis | None = None

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"degenerate frame {self.width}x{self.height}")
        if self.parent_axis is None and self.depth != 0:
            raise ValidationError("root frame must have depth 0")
        if self.parent_axis is not None and self.depth < 1:
            raise ValidationError("cut frames must have depth >= 1")

    @classmethod
    def root(cls, width: int, height: int) -> "SubImageFrame":
        return cls(Point(0.0, 0.0), width, height, 0, None)

    @property
    def bounds(self) -> ImageBounds:
        return ImageBounds(float(self.width), float(self.height))


def _clip_polygon_halfplane(polygon: list[tuple[float, float]],
                            sign: tuple[float, float, float],
                            keep_positive: bool) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of a polygon against a*x + b*y + c >= 0
    (or <= 0 when keep_positive is False)."""
    a, b, c = sign
    flip = 1.0 if keep_positive else -1.0

    def value(p):
        return flip * (a * p[0] + b * p[1] + c)

    out: list[tuple[float, float]] = []
    for k in range(len(polygon)):
        cur, nxt = polygon[k], polygon[(k + 1) % len(polygon)]
        vc, vn = value(cur), value(nxt)
        if vc >= 0:
            out.append(cur)
        if (vc > 0 and vn < 0) or (vc < 0 and vn > 0):
            t = vc / (vc - vn)
            out.append((cur[0] + t * (nxt[0] - cur[0]),
                        cur[1] + t * (nxt[1] - cur[1])))
    return out


def cut(frame: SubImageFrame, axis: SymmetryAxis) -> list[SubImageFrame]:
    """Split the frame along the axis's supporting line into up to two
    bounding-box frames. Returns [] when the line misses the frame."""
    ox, oy = frame.offset.x, frame.offset.y
    corners = [(ox, oy), (ox + frame.width, oy),
               (ox + frame.width, oy + frame.height), (ox, oy + frame.height)]
    seg = axis.segment
    a = seg.p2.y - seg.p1.y
    b = seg.p1.x - seg.p2.x
    c = -(a * seg.p1.x + b * seg.p1.y)
    values = [a * x + b * y + c for x, y in corners]
    if min(values) > 1e-9 or max(values) < -1e-9:
        return []  # the supporting line does not cross the frame

    children = []
    for keep_positive in (True, False):
        poly = _clip_polygon_halfplane(corners, (a, b, c), keep_positive)
        if len(poly) < 3:
            continue
        min_x = math.floor(min(p[0] for p in poly))
        max_x = math.ceil(max(p[0] for p in poly))
        min_y = math.floor(min(p[1] for p in poly))
        max_y = math.ceil(max(p[1] for p in poly))
        # Clamp to the parent frame; the polygon is already inside it up to
        # the floor/ceil snap.
        min_x = int(max(min_x, ox))
        min_y = int(max(min_y, oy))
        max_x = int(min(max_x, ox + frame.width))
        max_y = int(min(max_y, oy + frame.height))
        w, h = max_x - min_x, max_y - min_y
        if w < MIN_SUBIMAGE_SIDE or h < MIN_SUBIMAGE_SIDE:
            continue
        children.append(SubImageFrame(Point(float(min_x), float(min_y)), w, h,
                                      frame.depth + 1, axis))
    return children


def _remap(axis: SymmetryAxis, frame: SubImageFrame) -> SymmetryAxis:
    ox, oy = frame.offset.x, frame.offset.y
    seg = axis.segment
    moved = Segment(Point(seg.p1.x + ox, seg.p1.y + oy),
                    Point(seg.p2.x + ox, seg.p2.y + oy))
    return replace(axis, segment=moved, depth=frame.depth)


def localize(img: ImageRaster, cfg: PipelineConfig,
             detector: Detector) -> list[SymmetryAxis]:
    """All-depth axes: detect, filter, dedup at every node; recurse on the
    top CUT_AXES_PER_NODE axes until max_recursion_depth. A node whose
    filtered list is empty prunes its whole branch. Output order is
    canonical (depth, frame offset, descending score)."""
    collected: list[tuple[tuple, SymmetryAxis]] = []

    def process(frame: SubImageFrame) -> None:
        crop = img.crop(int(frame.offset.x), int(frame.offset.y),
                        frame.width, frame.height)
        local_axes = detector(crop)
        global_axes = [_remap(ax, frame) for ax in local_axes]
        retained = filter_axes(global_axes, cfg)
        if not retained:
            return
        deduped = dedup_axes(retained, cfg, frame.bounds)
        for ax in deduped:
            collected.append(((frame.depth, frame.offset.y, frame.offset.x,
                               -ax.score, ax.segment.p1.x, ax.segment.p1.y), ax))
        if frame.depth >= cfg.max_recursion_depth:
            return
        for ax in deduped[:CUT_AXES_PER_NODE]:
            for child in cut(frame, ax):
                process(child)

    process(SubImageFrame.root(img.width, img.height))
    collected.sort(key=lambda item: item[0])
    return [ax for _, ax in collected]
