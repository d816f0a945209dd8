"""Score-based axis retention and near-duplicate suppression.

Filtering keeps nothing unless the best axis of an image (or sub-image)
clears an absolute threshold, then keeps only axes scoring at least a
fixed fraction of that best score. Deduplication is a greedy scan in
descending score order: an element is dropped when an already-retained,
higher-scored element is geometrically similar to it.
"""

from __future__ import annotations

from .geometry import ImageBounds, angular_difference, distance, orientation
from .interchange import PipelineConfig, RotationCandidate, SymmetryAxis, axis_sort_key

# Circles count as similar when their radii differ by less than this fraction
# of the larger radius (and their centres are close).
CIRCLE_RADIUS_REL_TOL = 0.2


def filter_axes(axes: list[SymmetryAxis], cfg: PipelineConfig) -> list[SymmetryAxis]:
    """Keep axes only when the top score clears sym_threshold, and then only
    those within norm_threshold of the top score."""
    if not axes:
        return []
    ordered = sorted(axes, key=axis_sort_key)
    top = ordered[0].score
    if top < cfg.sym_threshold:
        return []
    cut = cfg.norm_threshold * top
    return [ax for ax in ordered if ax.score >= cut]


def _axes_similar(a: SymmetryAxis, b: SymmetryAxis, angle_eps: float,
                  center_eps: float) -> bool:
    if angular_difference(orientation(a.segment), orientation(b.segment)) >= angle_eps:
        return False
    return distance(a.segment.midpoint, b.segment.midpoint) < center_eps


def dedup_axes(axes: list[SymmetryAxis], cfg: PipelineConfig,
               bounds: ImageBounds) -> list[SymmetryAxis]:
    """Drop axes that duplicate a higher-scored axis in slope and centre."""
    center_eps = cfg.dedup_center_eps * bounds.diagonal
    kept: list[SymmetryAxis] = []
    for ax in sorted(axes, key=axis_sort_key):
        if not any(_axes_similar(ax, k, cfg.dedup_angle_eps, center_eps) for k in kept):
            kept.append(ax)
    return kept


def _circles_similar(a: RotationCandidate, b: RotationCandidate,
                     center_eps: float) -> bool:
    if distance(a.center, b.center) >= center_eps:
        return False
    return abs(a.radius - b.radius) / max(a.radius, b.radius) < CIRCLE_RADIUS_REL_TOL


def dedup_circles(circles: list[RotationCandidate], cfg: PipelineConfig,
                  bounds: ImageBounds) -> list[RotationCandidate]:
    """Drop circles that duplicate a higher-confidence circle in centre and radius."""
    center_eps = cfg.dedup_center_eps * bounds.diagonal
    ordered = sorted(circles, key=lambda c: (-c.confidence, c.center.x, c.center.y, c.radius))
    kept: list[RotationCandidate] = []
    for c in ordered:
        if not any(_circles_similar(c, k, center_eps) for k in kept):
            kept.append(c)
    return kept
