"""Render detected axes and rotation circles onto an image for inspection.

Axis color is indexed by recursion depth (depth 0 is blue, deeper levels
walk the palette below); rotation circles are always drawn in yellow.
Rendering is a pure sink: it never alters the pipeline's outputs.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image, ImageDraw

from .detector import ImageRaster
from .interchange import RotationCandidate, SymmetryAxis

DEPTH_PALETTE = (
    (40, 90, 235),    # depth 0: blue
    (60, 190, 90),    # depth 1: green
    (230, 70, 70),    # depth 2: red
    (240, 150, 40),   # depth 3: orange
    (170, 80, 220),   # depth 4: purple
    (60, 200, 210),   # depth 5: cyan
    (235, 95, 190),   # depth 6: pink
    (245, 245, 245),  # depth 7+: white
)
CIRCLE_COLOR = (250, 215, 0)

LINE_WIDTH = 2


def depth_color(depth: int) -> tuple[int, int, int]:
    return DEPTH_PALETTE[min(depth, len(DEPTH_PALETTE) - 1)]


def render_overlay(img: ImageRaster, axes: Iterable[SymmetryAxis],
                   rotations: Iterable[RotationCandidate],
                   out_path: str | Path) -> None:
    base = Image.fromarray((img.pixels * 255.0).round().astype(np.uint8))
    canvas = base.convert("RGB")
    draw = ImageDraw.Draw(canvas)
    for ax in axes:
        s = ax.segment
        draw.line([(s.p1.x, s.p1.y), (s.p2.x, s.p2.y)],
                  fill=depth_color(ax.depth), width=LINE_WIDTH)
    for circle in rotations:
        cx, cy, r = circle.center.x, circle.center.y, circle.radius
        draw.ellipse([cx - r, cy - r, cx + r, cy + r],
                     outline=CIRCLE_COLOR, width=LINE_WIDTH)
        draw.line([(cx - 3, cy), (cx + 3, cy)], fill=CIRCLE_COLOR, width=1)
        draw.line([(cx, cy - 3), (cx, cy + 3)], fill=CIRCLE_COLOR, width=1)
    canvas.save(out_path)
