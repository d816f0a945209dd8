"""Rotational-symmetry candidates from reflection-axis pairs.

A crossing between two strong, clearly non-parallel reflection axes is
evidence of a rotational symmetry centred on the crossing. Two routes turn
that evidence into circles: a thresholded perpendicularity rule, and a
trained decision forest fed a 12-value descriptor of the axis pair.

Feature vector (fixed order):

    score_diff   |score(A) - score(B)|
    angle_a      orientation of A in [0, pi)
    angle_b      orientation of B in [0, pi)
    angle_diff   angle between the two lines, [0, pi/2]
    perp_a       (angle_a + pi/2) mod pi
    perp_diff    angle between perp_a and angle_b, [0, pi/2]
    length_diff  |len(A) - len(B)| / image diagonal
    intersects   1.0 when the infinite lines cross inside the image
    dist_a1..b2  endpoint-to-crossing distances / diagonal (2.0 sentinel
                 when the lines do not cross inside the image)

A is the higher-scored axis of the pair (coordinate order breaks ties), so
featurize(a, b) == featurize(b, a) exactly.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, replace
from typing import TYPE_CHECKING

from .errors import ContractError
from .geometry import (ImageBounds, Point, angular_difference, distance,
                       line_intersection, orientation, rotate_segment,
                       segment_length)
from .interchange import (PROVENANCE_MODEL, PROVENANCE_RULE, PipelineConfig,
                          RotationCandidate, SymmetryAxis, axis_sort_key)
from .refine import dedup_circles

if TYPE_CHECKING:
    from .forest import DecisionForest

FEATURE_COUNT = 12

# Axis pairs closer to parallel than this never yield rotation candidates.
NEAR_PARALLEL_FLOOR = math.radians(10.0)
# Tolerance on perpendicularity for the rule-based route.
PERP_TOLERANCE = math.radians(10.0)
# Distance value recorded when a pair has no usable crossing.
NO_INTERSECTION_SENTINEL = 2.0

_MIN_RADIUS = 1e-9


@dataclass(frozen=True)
class LinePairFeatures:
    score_diff: float
    angle_a: float
    angle_b: float
    angle_diff: float
    perp_a: float
    perp_diff: float
    length_diff: float
    intersects: float
    dist_a1: float
    dist_a2: float
    dist_b1: float
    dist_b2: float

    def as_tuple(self) -> tuple[float, ...]:
        return astuple(self)


def _canonical_pair(a: SymmetryAxis, b: SymmetryAxis) -> tuple[SymmetryAxis, SymmetryAxis]:
    return (a, b) if axis_sort_key(a) <= axis_sort_key(b) else (b, a)


def _inside_intersection(a: SymmetryAxis, b: SymmetryAxis,
                         bounds: ImageBounds) -> Point | None:
    p = line_intersection(a.segment, b.segment)
    if p is None or not bounds.contains(p):
        return None
    return p


def featurize(a: SymmetryAxis, b: SymmetryAxis, bounds: ImageBounds) -> LinePairFeatures:
    """Describe an unordered axis pair; deterministic under argument swap."""
    a, b = _canonical_pair(a, b)
    diag = bounds.diagonal
    angle_a = orientation(a.segment)
    angle_b = orientation(b.segment)
    perp_a = (angle_a + math.pi / 2.0) % math.pi
    cross = _inside_intersection(a, b, bounds)
    if cross is None:
        intersects = 0.0
        dists = (NO_INTERSECTION_SENTINEL,) * 4
    else:
        intersects = 1.0
        dists = tuple(
            distance(p, cross) / diag
            for p in (a.segment.p1, a.segment.p2, b.segment.p1, b.segment.p2))
    return LinePairFeatures(
        score_diff=abs(a.score - b.score),
        angle_a=angle_a,
        angle_b=angle_b,
        angle_diff=angular_difference(angle_a, angle_b),
        perp_a=perp_a,
        perp_diff=angular_difference(perp_a, angle_b),
        length_diff=abs(segment_length(a.segment) - segment_length(b.segment)) / diag,
        intersects=intersects,
        dist_a1=dists[0], dist_a2=dists[1], dist_b1=dists[2], dist_b2=dists[3])


def _candidate_radius(a: SymmetryAxis, b: SymmetryAxis, center: Point) -> float:
    return min(distance(p, center)
               for p in (a.segment.p1, a.segment.p2, b.segment.p1, b.segment.p2))


def rule_rotation(a: SymmetryAxis, b: SymmetryAxis, cfg: PipelineConfig,
                  bounds: ImageBounds) -> RotationCandidate | None:
    """Perpendicular crossing of similarly-scored axes -> circle at the crossing."""
    a, b = _canonical_pair(a, b)
    center = _inside_intersection(a, b, bounds)
    if center is None:
        return None
    perp_a = (orientation(a.segment) + math.pi / 2.0) % math.pi
    if angular_difference(perp_a, orientation(b.segment)) >= PERP_TOLERANCE:
        return None
    hi, lo = a.score, b.score
    if lo > hi:
        hi, lo = lo, hi
    if hi <= 0.0 or lo / hi < cfg.circle_threshold:
        return None
    radius = _candidate_radius(a, b, center)
    if radius < _MIN_RADIUS:
        return None
    return RotationCandidate(center, radius, confidence=lo, provenance=PROVENANCE_RULE)


def model_rotation(axes: list[SymmetryAxis], model: "DecisionForest",
                   cfg: PipelineConfig, bounds: ImageBounds) -> list[RotationCandidate]:
    """Classify every crossing, non-near-parallel axis pair with the forest;
    accepted pairs become circles at their exact line intersection."""
    if model.feature_count != FEATURE_COUNT:
        raise ContractError(
            f"model expects {model.feature_count} features, this featurizer "
            f"produces {FEATURE_COUNT}")
    ordered = sorted(axes, key=axis_sort_key)
    candidates: list[RotationCandidate] = []
    for i in range(len(ordered)):
        for j in range(i + 1, len(ordered)):
            a, b = ordered[i], ordered[j]
            features = featurize(a, b, bounds)
            if features.intersects != 1.0 or features.angle_diff < NEAR_PARALLEL_FLOOR:
                continue
            proba = model.predict_proba(features)
            if proba < cfg.model_decision_threshold:
                continue
            center = _inside_intersection(a, b, bounds)
            if center is None:
                continue
            radius = _candidate_radius(a, b, center)
            if radius < _MIN_RADIUS:
                continue
            candidates.append(RotationCandidate(center, radius, confidence=proba,
                                                provenance=PROVENANCE_MODEL))
    return dedup_circles(candidates, cfg, bounds)


def rotated_pair(a: SymmetryAxis, b: SymmetryAxis, center: Point,
                 theta: float) -> tuple[SymmetryAxis, SymmetryAxis]:
    """Both axes rigidly rotated about center; scores and tags preserved."""
    return (replace(a, segment=rotate_segment(a.segment, center, theta)),
            replace(b, segment=rotate_segment(b.segment, center, theta)))
