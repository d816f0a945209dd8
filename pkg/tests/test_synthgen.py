import math

import numpy as np
import pytest

from symdetect.errors import ValidationError
from symdetect.forest import ROTATION_COPIES
from symdetect.geometry import orientation, point_to_line_distance
from symdetect.synthgen import (KIND_DIHEDRAL, KIND_GRID, KIND_MIRROR,
                                PatternSpec, build_pair_dataset, generate,
                                pattern_ground_truth)


def test_dihedral_ground_truth_structure():
    spec = PatternSpec(KIND_DIHEDRAL, n=4, size=256, motif_seed=1)
    img, gt = generate(spec)
    assert img.width == img.height == 256
    assert len(gt.axes) == 4
    assert len(gt.rotations) == 1
    center = gt.rotations[0].center
    assert (center.x, center.y) == (128.0, 128.0)
    angles = sorted(orientation(seg) for seg in gt.axes)
    diffs = [angles[i + 1] - angles[i] for i in range(3)]
    assert diffs == pytest.approx([math.pi / 4] * 3, abs=1e-9)
    for seg in gt.axes:
        assert point_to_line_distance(center, seg) < 1e-6


@pytest.mark.parametrize("n", [2, 3, 6])
def test_dihedral_axes_pass_through_center(n):
    for seed in range(3):
        gt = pattern_ground_truth(PatternSpec(KIND_DIHEDRAL, n=n, size=128,
                                              motif_seed=seed))
        assert len(gt.axes) == n
        center = gt.rotations[0].center
        for seg in gt.axes:
            assert point_to_line_distance(center, seg) < 1e-6


def test_mirror_ground_truth_and_exact_symmetry():
    for seed in range(8):  # walks all four mirror kinds
        spec = PatternSpec(KIND_MIRROR, size=128, motif_seed=seed)
        img, gt = generate(spec)
        assert len(gt.axes) == 1
        assert len(gt.rotations) == 0
        seg = gt.axes[0]
        px = img.pixels
        if seg.p1.x == seg.p2.x:          # vertical
            reflected = px[:, ::-1]
        elif seg.p1.y == seg.p2.y:        # horizontal
            reflected = px[::-1, :]
        elif seg.p1.y < seg.p2.y:         # main diagonal
            reflected = px.T
        else:                             # antidiagonal
            reflected = px.T[::-1, ::-1]
        assert np.array_equal(px, reflected)


def test_generation_is_deterministic():
    spec = PatternSpec(KIND_DIHEDRAL, n=3, size=128, motif_seed=9,
                       noise_sigma=0.05)
    a, gt_a = generate(spec)
    b, gt_b = generate(spec)
    assert np.array_equal(a.pixels, b.pixels)
    assert gt_a == gt_b


def test_noise_changes_pixels_not_ground_truth():
    clean = PatternSpec(KIND_DIHEDRAL, n=4, size=128, motif_seed=2)
    noisy = PatternSpec(KIND_DIHEDRAL, n=4, size=128, motif_seed=2,
                        noise_sigma=0.05)
    img_c, gt_c = generate(clean)
    img_n, gt_n = generate(noisy)
    assert not np.array_equal(img_c.pixels, img_n.pixels)
    assert gt_c == gt_n


def test_grid_ground_truth():
    spec = PatternSpec(KIND_GRID, size=256, motif_seed=3)
    img, gt = generate(spec)
    assert gt.rotations == ()
    assert len(gt.axes) >= 4
    verticals = sorted({seg.p1.x for seg in gt.axes if seg.p1.x == seg.p2.x})
    spacing = {round(b - a, 6) for a, b in zip(verticals, verticals[1:])}
    assert len(spacing) == 1  # evenly spaced


def test_spec_validation():
    with pytest.raises(ValidationError):
        PatternSpec("spiral")
    with pytest.raises(ValidationError):
        PatternSpec(KIND_DIHEDRAL, n=1)
    with pytest.raises(ValidationError):
        PatternSpec(KIND_MIRROR, size=32)
    with pytest.raises(ValidationError):
        PatternSpec(KIND_MIRROR, noise_sigma=-0.1)


def test_pair_dataset_combinatorics():
    spec = PatternSpec(KIND_DIHEDRAL, n=4, size=128, motif_seed=4)
    data = build_pair_dataset([spec], negatives_ratio=0.0, seed=0)
    # C(4, 2) = 6 base pairs, each with its original plus 720 rotated copies
    assert len(data) == 6 * (ROTATION_COPIES + 1)
    assert all(p.label == 1 for p in data)
    assert all(p.features.intersects == 1.0 for p in data)


def test_pair_dataset_balance_and_labels():
    specs = [PatternSpec(KIND_DIHEDRAL, n=n, size=128, motif_seed=i)
             for i, n in enumerate([2, 3, 4])]
    data = build_pair_dataset(specs, negatives_ratio=1.0, seed=1)
    n_pos = sum(p.label for p in data)
    n_neg = len(data) - n_pos
    assert abs(n_pos - n_neg) / ((n_pos + n_neg) / 2) < 0.10
    # positives always cross; negatives exist in all flavors
    assert all(p.features.intersects == 1.0 for p in data if p.label == 1)
    near_parallel = [p for p in data if p.label == 0
                     and p.features.angle_diff < math.radians(10)]
    assert near_parallel


def test_pair_dataset_needs_dihedral_specs():
    with pytest.raises(ValidationError):
        build_pair_dataset([PatternSpec(KIND_MIRROR, motif_seed=0)])


def test_pair_dataset_deterministic():
    specs = [PatternSpec(KIND_DIHEDRAL, n=3, size=128, motif_seed=7)]
    a = build_pair_dataset(specs, negatives_ratio=0.5, seed=3)
    b = build_pair_dataset(specs, negatives_ratio=0.5, seed=3)
    assert a == b
