"""Detection scoring: greedy rank-ordered matching against ground truth,
precision/recall sweep over score thresholds, and the max-F1 summary.

Detections are processed in descending score order. A detection similar to
an already-kept detection is suppressed outright; otherwise it matches the
closest ground-truth axis within tolerance (several detections may group
onto one ground truth) or counts as a false positive. Precision is taken
over kept detections, recall over ground truths with at least one match.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import (ImageBounds, Segment, angular_difference, distance,
                       orientation)
from .interchange import (GroundTruthRotation, RotationCandidate, SymmetryAxis,
                          axis_sort_key)

MATCHED = "matched"
SUPPRESSED = "suppressed"
FALSE_POSITIVE = "false_positive"

# When a ground-truth rotation declares a radius, candidates must agree
# within this relative tolerance; centre-only ground truths ignore radius.
ROTATION_RADIUS_REL_TOL = 0.5


@dataclass(frozen=True)
class MatchConfig:
    angle_tol: float = math.radians(10.0)
    center_tol: float = 0.10  # fraction of the image diagonal
    rotation_center_tol: float = 0.05

    def __post_init__(self) -> None:
        for name in ("angle_tol", "center_tol", "rotation_center_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Assignment:
    detection: int  # index into the caller's detection list
    status: str
    gt_index: int | None = None


@dataclass(frozen=True)
class MatchResult:
    assignments: tuple[Assignment, ...]
    precision: float
    recall: float
    f1: float
    matched: int
    kept: int
    gt_matched: int
    gt_total: int


@dataclass(frozen=True)
class EvalReport:
    thresholds: tuple[float, ...]
    precisions: tuple[float, ...]
    recalls: tuple[float, ...]
    f1_scores: tuple[float, ...]
    max_f1: float
    best_threshold: float | None
    assignments: tuple[Assignment, ...]  # at the best threshold


def f1(p: float, r: float) -> float:
    """Harmonic mean of precision and recall; 0 when both vanish."""
    s = p + r
    return 0.0 if s == 0.0 else 2.0 * p * r / s


def _axis_geom(seg: Segment):
    return orientation(seg), seg.midpoint


def _similar(ga, gb, angle_tol: float, dist_tol: float) -> bool:
    if angular_difference(ga[0], gb[0]) >= angle_tol:
        return False
    return distance(ga[1], gb[1]) < dist_tol


def match_axes(detections: list[SymmetryAxis], gt: list[Segment],
               mc: MatchConfig, bounds: ImageBounds) -> MatchResult:
    dist_tol = mc.center_tol * bounds.diagonal
    gt_geoms = [_axis_geom(seg) for seg in gt]
    order = sorted(range(len(detections)), key=lambda i: axis_sort_key(detections[i]))
    kept_geoms = []
    assignments = []
    matched = 0
    gt_hit: set[int] = set()
    for i in order:
        geom = _axis_geom(detections[i].segment)
        if any(_similar(geom, k, mc.angle_tol, dist_tol) for k in kept_geoms):
            assignments.append(Assignment(i, SUPPRESSED))
            continue
        kept_geoms.append(geom)
        best_j = None
        best_d = math.inf
        for j, gg in enumerate(gt_geoms):
            if _similar(geom, gg, mc.angle_tol, dist_tol):
                d = distance(geom[1], gg[1])
                if d < best_d:
                    best_j, best_d = j, d
        if best_j is None:
            assignments.append(Assignment(i, FALSE_POSITIVE))
        else:
            assignments.append(Assignment(i, MATCHED, best_j))
            matched += 1
            gt_hit.add(best_j)
    kept = len(kept_geoms)
    precision = matched / kept if kept else 0.0
    recall = len(gt_hit) / len(gt) if gt else 1.0
    return MatchResult(tuple(assignments), precision, recall, f1(precision, recall),
                       matched, kept, len(gt_hit), len(gt))


def sweep_max_f1(detections: list[SymmetryAxis], gt: list[Segment],
                 mc: MatchConfig, bounds: ImageBounds) -> EvalReport:
    """Run match_axes at every distinct detection score and take the best F1."""
    thresholds = sorted({ax.score for ax in detections}, reverse=True)
    precisions, recalls, f1s = [], [], []
    best_f1 = 0.0
    best_t: float | None = None
    best_assignments: tuple[Assignment, ...] = ()
    for t in thresholds:
        subset_idx = [i for i, ax in enumerate(detections) if ax.score >= t]
        subset = [detections[i] for i in subset_idx]
        res = match_axes(subset, gt, mc, bounds)
        precisions.append(res.precision)
        recalls.append(res.recall)
        f1s.append(res.f1)
        if best_t is None or res.f1 > best_f1:
            best_f1 = res.f1
            best_t = t
            best_assignments = tuple(
                Assignment(subset_idx[a.detection], a.status, a.gt_index)
                for a in res.assignments)
    return EvalReport(tuple(thresholds), tuple(precisions), tuple(recalls),
                      tuple(f1s), max(f1s) if f1s else 0.0, best_t, best_assignments)


def sweep_max_f1_pooled(
        collections: list[tuple[list[SymmetryAxis], list[Segment], ImageBounds]],
        mc: MatchConfig) -> EvalReport:
    """Aggregate sweep over several images: counts are summed per threshold,
    matching still happens within each image."""
    thresholds = sorted({ax.score for dets, _, _ in collections for ax in dets},
                        reverse=True)
    precisions, recalls, f1s = [], [], []
    for t in thresholds:
        matched = kept = gt_matched = gt_total = 0
        for dets, gt, bounds in collections:
            subset = [ax for ax in dets if ax.score >= t]
            res = match_axes(subset, gt, mc, bounds)
            matched += res.matched
            kept += res.kept
            gt_matched += res.gt_matched
            gt_total += res.gt_total
        p = matched / kept if kept else 0.0
        r = gt_matched / gt_total if gt_total else 1.0
        precisions.append(p)
        recalls.append(r)
        f1s.append(f1(p, r))
    best = max(f1s) if f1s else 0.0
    best_t = thresholds[f1s.index(best)] if f1s else None
    return EvalReport(tuple(thresholds), tuple(precisions), tuple(recalls),
                      tuple(f1s), best, best_t, ())


@dataclass(frozen=True)
class RotationMatchCounts:
    matched: int
    candidates: int
    gt_matched: int
    gt_total: int

    def rates(self) -> tuple[float, float, float]:
        p = self.matched / self.candidates if self.candidates else 0.0
        r = self.gt_matched / self.gt_total if self.gt_total else 1.0
        return p, r, f1(p, r)


def rotation_match_counts(candidates: list[RotationCandidate],
                          gt: list[GroundTruthRotation], mc: MatchConfig,
                          bounds: ImageBounds) -> RotationMatchCounts:
    tol = mc.rotation_center_tol * bounds.diagonal
    matched = 0
    gt_hit: set[int] = set()
    ordered = sorted(candidates,
                     key=lambda c: (-c.confidence, c.center.x, c.center.y, c.radius))
    for cand in ordered:
        best_j = None
        best_d = math.inf
        for j, g in enumerate(gt):
            d = distance(cand.center, g.center)
            if d >= tol:
                continue
            if g.radius is not None:
                if abs(cand.radius - g.radius) / max(cand.radius, g.radius) \
                        >= ROTATION_RADIUS_REL_TOL:
                    continue
            if d < best_d:
                best_j, best_d = j, d
        if best_j is not None:
            matched += 1
            gt_hit.add(best_j)
    return RotationMatchCounts(matched, len(candidates), len(gt_hit), len(gt))


def match_rotations(candidates: list[RotationCandidate],
                    gt: list[GroundTruthRotation], mc: MatchConfig,
                    bounds: ImageBounds) -> tuple[float, float, float]:
    """Centre-distance matching with the same grouping rule as axes;
    returns (precision, recall, f1)."""
    return rotation_match_counts(candidates, gt, mc, bounds).rates()
