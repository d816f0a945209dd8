"""Synthetic images with analytically known symmetries, their ground truth,
and labeled line-pair datasets for classifier training.

Pattern kinds:

* ``mirror``: a random smooth field averaged with its own reflection. The
  axis is drawn from the four grid-exact reflections through the centre
  (vertical, horizontal, both diagonals) so that, at zero noise, reflecting
  the pixel array across the axis reproduces it bit for bit.
* ``dihedral`` (order n): a random smooth field evaluated on angle
  coordinates folded into a wedge of pi/n, producing n mirror axes through
  the centre at pi/n increments plus an n-fold rotation centre. Rendered
  inside a disc, faded into a flat background at the rim.
* ``grid``: a doubly mirror-symmetric tile repeated over the image, giving
  periodic vertical and horizontal axes at half-tile spacing.

Every pattern is a pure function of its spec, including its ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import ndimage

from .detector import ImageRaster
from .errors import ValidationError
from .forest import LabeledPair, augment_rotations
from .geometry import (ImageBounds, Point, Segment, extend_to_rect,
                       orientation, rotate_segment)
from .interchange import (SOURCE_EXTERNAL, GroundTruth, GroundTruthRotation,
                          SymmetryAxis)
from .rotation import NEAR_PARALLEL_FLOOR, featurize

KIND_MIRROR = "mirror"
KIND_DIHEDRAL = "dihedral"
KIND_GRID = "grid"
KINDS = (KIND_MIRROR, KIND_DIHEDRAL, KIND_GRID)

MIN_PATTERN_SIZE = 64

# The four reflections that map the pixel grid onto itself exactly.
_MIRROR_KINDS = ("vertical", "horizontal", "diagonal", "antidiagonal")


@dataclass(frozen=True)
class PatternSpec:
    kind: str
    n: int = 4
    size: int = 256
    motif_seed: int = 0
    noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValidationError(f"unknown pattern kind {self.kind!r}")
        if self.kind == KIND_DIHEDRAL and self.n < 2:
            raise ValidationError("dihedral order must be >= 2")
        if self.size < MIN_PATTERN_SIZE:
            raise ValidationError(f"pattern size must be >= {MIN_PATTERN_SIZE}")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma must be >= 0")


def _geom_rng(spec: PatternSpec) -> np.random.Generator:
    return np.random.default_rng([spec.motif_seed, 0])


def _pixel_rng(spec: PatternSpec) -> np.random.Generator:
    return np.random.default_rng([spec.motif_seed, 1])


def _smooth_noise(size: int, rng: np.random.Generator) -> np.ndarray:
    coarse = ndimage.gaussian_filter(rng.random((size, size)), sigma=6.0)
    fine = ndimage.gaussian_filter(rng.random((size, size)), sigma=2.0)
    field = coarse + 0.5 * fine
    lo, hi = field.min(), field.max()
    return 0.1 + 0.8 * (field - lo) / (hi - lo)


def _reflect(pixels: np.ndarray, mirror_kind: str) -> np.ndarray:
    if mirror_kind == "vertical":
        return pixels[:, ::-1]
    if mirror_kind == "horizontal":
        return pixels[::-1, :]
    if mirror_kind == "diagonal":
        return pixels.T
    if mirror_kind == "antidiagonal":
        return pixels.T[::-1, ::-1]
    raise ValidationError(f"unknown mirror kind {mirror_kind!r}")


def _mirror_axis_segment(mirror_kind: str, size: int) -> Segment:
    s = float(size)
    if mirror_kind == "vertical":
        return Segment(Point(s / 2, 0.0), Point(s / 2, s))
    if mirror_kind == "horizontal":
        return Segment(Point(0.0, s / 2), Point(s, s / 2))
    if mirror_kind == "diagonal":
        return Segment(Point(0.0, 0.0), Point(s, s))
    return Segment(Point(0.0, s), Point(s, 0.0))


def _mirror_params(spec: PatternSpec) -> str:
    rng = _geom_rng(spec)
    return _MIRROR_KINDS[int(rng.integers(0, len(_MIRROR_KINDS)))]


def _dihedral_params(spec: PatternSpec) -> tuple[float, float]:
    rng = _geom_rng(spec)
    alpha0 = float(rng.uniform(0.0, math.pi / spec.n))
    radius = float(rng.uniform(0.30, 0.48)) * spec.size
    return alpha0, radius


def _grid_params(spec: PatternSpec) -> int:
    rng = _geom_rng(spec)
    return int(rng.choice([spec.size // 4, spec.size // 8]))


def pattern_ground_truth(spec: PatternSpec) -> GroundTruth:
    """Ground truth of the pattern, derived without rendering pixels."""
    s = spec.size
    if spec.kind == KIND_MIRROR:
        seg = _mirror_axis_segment(_mirror_params(spec), s)
        return GroundTruth((seg,), (), s, s)
    if spec.kind == KIND_DIHEDRAL:
        alpha0, radius = _dihedral_params(spec)
        center = Point(s / 2.0, s / 2.0)
        axes = []
        for j in range(spec.n):
            beta = alpha0 + j * math.pi / spec.n
            dx, dy = radius * math.cos(beta), radius * math.sin(beta)
            axes.append(Segment(Point(center.x - dx, center.y - dy),
                                Point(center.x + dx, center.y + dy)))
        return GroundTruth(tuple(axes),
                           (GroundTruthRotation(center, radius),), s, s)
    tile = _grid_params(spec)
    axes = []
    k = 1
    while k * tile / 2.0 < s:
        pos = k * tile / 2.0
        axes.append(Segment(Point(pos, 0.0), Point(pos, float(s))))
        axes.append(Segment(Point(0.0, pos), Point(float(s), pos)))
        k += 1
    return GroundTruth(tuple(axes), (), s, s)


def _render_mirror(spec: PatternSpec) -> np.ndarray:
    mirror_kind = _mirror_params(spec)
    base = _smooth_noise(spec.size, _pixel_rng(spec))
    return (base + _reflect(base, mirror_kind)) / 2.0


def _render_dihedral(spec: PatternSpec) -> np.ndarray:
    alpha0, radius = _dihedral_params(spec)
    rng = _pixel_rng(spec)
    s = spec.size
    coords = np.arange(s) + 0.5
    xx, yy = np.meshgrid(coords, coords)
    dx = xx - s / 2.0
    dy = yy - s / 2.0
    r = np.hypot(dx, dy)
    period = 2.0 * math.pi / spec.n
    folded = np.mod(np.arctan2(dy, dx) - alpha0, period)
    folded = np.where(folded > period / 2.0, period - folded, folded)
    u = r * np.cos(folded)
    v = r * np.sin(folded)
    value = np.zeros_like(r)
    for _ in range(4):
        wavelength = rng.uniform(10.0, 40.0)
        direction = rng.uniform(0.0, 2.0 * math.pi)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        fx = 2.0 * math.pi / wavelength * math.cos(direction)
        fy = 2.0 * math.pi / wavelength * math.sin(direction)
        value += rng.uniform(0.5, 1.0) * np.sin(fx * u + fy * v + phase)
    value = 0.5 + 0.35 * value / 4.0
    ring_wavelength = rng.uniform(18.0, 40.0)
    ring_phase = rng.uniform(0.0, 2.0 * math.pi)
    value += 0.15 * np.sin(2.0 * math.pi * r / ring_wavelength + ring_phase)
    blend = np.clip((radius - r) / 8.0, 0.0, 1.0)  # fade the disc rim
    return np.clip(0.5 + blend * (value - 0.5), 0.0, 1.0)


def _render_grid(spec: PatternSpec) -> np.ndarray:
    tile_size = _grid_params(spec)
    tile = _smooth_noise(tile_size, _pixel_rng(spec))
    tile = (tile + tile[:, ::-1]) / 2.0
    tile = (tile + tile[::-1, :]) / 2.0
    reps = -(-spec.size // tile_size)
    return np.tile(tile, (reps, reps))[:spec.size, :spec.size]


def generate(spec: PatternSpec) -> tuple[ImageRaster, GroundTruth]:
    """Render the pattern and its ground truth; deterministic per spec."""
    if spec.kind == KIND_MIRROR:
        pixels = _render_mirror(spec)
    elif spec.kind == KIND_DIHEDRAL:
        pixels = _render_dihedral(spec)
    else:
        pixels = _render_grid(spec)
    if spec.noise_sigma > 0:
        noise = np.random.default_rng([spec.motif_seed, 2]).normal(
            0.0, spec.noise_sigma, pixels.shape)
        pixels = np.clip(pixels + noise, 0.0, 1.0)
    return ImageRaster(pixels), pattern_ground_truth(spec)


# ---------------------------------------------------------------------------
# Labeled pair datasets


def _scored_axis(seg: Segment, score: float) -> SymmetryAxis:
    return SymmetryAxis(seg, score, depth=0, source=SOURCE_EXTERNAL)


def _extent_variant(seg: Segment, bounds: ImageBounds, use_rect: bool) -> Segment:
    """Detector output spans the whole image rectangle while construction
    axes end at the pattern rim; training covers both extents."""
    if not use_rect:
        return seg
    extended = extend_to_rect(seg, bounds)
    return extended if extended is not None else seg


def _perpendicular_offset(seg: Segment, dist: float) -> Segment:
    alpha = orientation(seg)
    nx, ny = -math.sin(alpha), math.cos(alpha)
    return Segment(Point(seg.p1.x + nx * dist, seg.p1.y + ny * dist),
                   Point(seg.p2.x + nx * dist, seg.p2.y + ny * dist))


def build_pair_dataset(specs: list[PatternSpec], negatives_ratio: float = 1.0,
                       seed: int = 0) -> list[LabeledPair]:
    """Positives: same-pattern dihedral axis pairs (crossing at the rotation
    centre), each expanded by the 720-step rotation augmentation. Negatives:
    (a) axis pairs from two patterns composited side by side, (b) positives
    with one axis pushed off-centre by at least 10% of the diagonal, and
    (c) near-parallel pairs. The returned set is balanced to negatives_ratio.
    """
    if negatives_ratio < 0:
        raise ValidationError("negatives_ratio must be >= 0")
    dihedral = [s for s in specs if s.kind == KIND_DIHEDRAL]
    if not dihedral:
        raise ValidationError("need at least one dihedral spec to produce positives")
    rng = np.random.default_rng(seed)

    # Per-pattern ground truths and per-axis scores, drawn once.
    truths = [(spec, pattern_ground_truth(spec)) for spec in specs]
    scored: list[tuple[PatternSpec, ImageBounds, list[SymmetryAxis]]] = []
    for spec, gt in truths:
        bounds = ImageBounds(float(spec.size), float(spec.size))
        axes = [_scored_axis(seg, float(rng.uniform(0.6, 1.0))) for seg in gt.axes]
        scored.append((spec, bounds, axes))
    dihedral_scored = [(spec, bounds, axes) for (spec, bounds, axes) in scored
                       if spec.kind == KIND_DIHEDRAL]

    positives: list[LabeledPair] = []
    base_pairs: list[tuple[SymmetryAxis, SymmetryAxis, ImageBounds]] = []
    for spec, bounds, axes in dihedral_scored:
        for a, b in combinations(axes, 2):
            use_rect = bool(rng.random() < 0.5)
            a2 = _scored_axis(_extent_variant(a.segment, bounds, use_rect), a.score)
            b2 = _scored_axis(_extent_variant(b.segment, bounds, use_rect), b.score)
            features = featurize(a2, b2, bounds)
            if features.intersects != 1.0 or features.angle_diff < NEAR_PARALLEL_FLOOR:
                continue  # near-parallel crossings are never labelled positive
            base_pairs.append((a2, b2, bounds))
            positives.append(LabeledPair(features, 1))
            positives.extend(augment_rotations(a2, b2, bounds))

    n_neg = int(round(len(positives) * negatives_ratio))
    negatives: list[LabeledPair] = []

    def random_scored(axes: list[SymmetryAxis]) -> SymmetryAxis:
        ax = axes[int(rng.integers(0, len(axes)))]
        return _scored_axis(ax.segment, float(rng.uniform(0.6, 1.0)))

    def negative_composite() -> LabeledPair:
        if len(scored) < 2:
            return negative_jitter()
        ia, ib = rng.choice(len(scored), size=2, replace=False)
        spec_a, _, axes_a = scored[int(ia)]
        spec_b, _, axes_b = scored[int(ib)]
        canvas = ImageBounds(float(spec_a.size + spec_b.size),
                             float(max(spec_a.size, spec_b.size)))
        a = random_scored(axes_a)
        b = random_scored(axes_b)
        shifted = Segment(Point(b.segment.p1.x + spec_a.size, b.segment.p1.y),
                          Point(b.segment.p2.x + spec_a.size, b.segment.p2.y))
        return LabeledPair(featurize(a, _scored_axis(shifted, b.score), canvas), 0)

    def negative_jitter() -> LabeledPair:
        a, b, bounds = base_pairs[int(rng.integers(0, len(base_pairs)))]
        dist = float(rng.uniform(0.10, 0.30)) * bounds.diagonal
        if rng.random() < 0.5:
            dist = -dist
        moved = _scored_axis(_perpendicular_offset(b.segment, dist), b.score)
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        center = Point(bounds.width / 2.0, bounds.height / 2.0)
        ra, rb = (rotate_segment(a.segment, center, theta),
                  rotate_segment(moved.segment, center, theta))
        return LabeledPair(featurize(_scored_axis(ra, a.score),
                                     _scored_axis(rb, moved.score), bounds), 0)

    def negative_near_parallel() -> LabeledPair:
        _, bounds, axes = dihedral_scored[int(rng.integers(0, len(dihedral_scored)))]
        a = random_scored(axes)
        tilt = float(rng.uniform(math.radians(1.0), math.radians(8.0)))
        if rng.random() < 0.5:
            tilt = -tilt
        twin = rotate_segment(a.segment, a.segment.midpoint, tilt)
        offset = float(rng.uniform(0.02, 0.30)) * bounds.diagonal
        twin = _perpendicular_offset(twin, offset)
        return LabeledPair(featurize(a, _scored_axis(twin, float(rng.uniform(0.6, 1.0))),
                                     bounds), 0)

    makers = (negative_composite, negative_jitter, negative_near_parallel)
    shares = (0.4, 0.4, 0.2)
    for maker, share in zip(makers, shares):
        count = int(round(n_neg * share))
        for _ in range(count):
            negatives.append(maker())
    while len(negatives) < n_neg:
        negatives.append(negative_jitter())
    return positives + negatives[:n_neg]
