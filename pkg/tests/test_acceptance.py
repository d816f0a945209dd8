"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest -s tests/test_acceptance.py` to watch them).

The heavyweight fixtures (the full synthetic dataset and the 100-tree
classifier) are built once and shared across criteria.
"""

import math
import time

import numpy as np
import pytest

from symdetect import localizer as localizer_mod
from symdetect.cli import main
from symdetect.detector import detect_axes
from symdetect.evaluation import (MatchConfig, RotationMatchCounts, f1,
                                  match_axes, rotation_match_counts)
from symdetect.forest import (ForestConfig, audit_split_gains, balanced_weights,
                              dataset_arrays, entropy, max_tree_depth, roc_auc,
                              train, train_test_split)
from symdetect.geometry import (ImageBounds, angular_difference, orientation,
                                point_to_line_distance)
from symdetect.interchange import (SOURCE_EXTERNAL, PipelineConfig,
                                   SymmetryAxis)
from symdetect.localizer import localize
from symdetect.refine import dedup_axes, dedup_circles, filter_axes
from symdetect.rotation import model_rotation, rule_rotation
from symdetect.synthgen import (KIND_DIHEDRAL, KIND_MIRROR, PatternSpec,
                                build_pair_dataset, generate,
                                pattern_ground_truth)

from conftest import axis
from test_evaluation import toy_instance

DATASET_SEED = 73
ORDERS = (2, 3, 4, 6)
PATTERN_COUNT = 20
PATTERN_SIZE = 256

_timings: dict[str, float] = {}


def _criterion(num, name, ok, detail=""):
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def full_dataset():
    specs = [PatternSpec(KIND_DIHEDRAL, n=ORDERS[i % len(ORDERS)],
                         size=PATTERN_SIZE, motif_seed=DATASET_SEED * 100 + i)
             for i in range(PATTERN_COUNT)]
    t0 = time.perf_counter()
    data = build_pair_dataset(specs, negatives_ratio=1.0, seed=DATASET_SEED)
    _timings["dataset"] = time.perf_counter() - t0
    return data


@pytest.fixture(scope="module")
def table3_model(full_dataset):
    train_part, test_part = train_test_split(full_dataset, 0.3, seed=DATASET_SEED)
    cfg = ForestConfig(n_trees=100, max_depth=10, criterion="entropy",
                       class_weight="balanced", seed=DATASET_SEED)
    t0 = time.perf_counter()
    model = train(train_part, cfg)
    _timings["train"] = time.perf_counter() - t0
    return model, train_part, test_part


def test_criterion_1_classifier_quality(full_dataset, table3_model):
    model, train_part, test_part = table3_model
    assert PATTERN_COUNT >= 20
    assert len(full_dataset) >= 50_000
    t0 = time.perf_counter()
    X, y = dataset_arrays(test_part)
    scores = model.predict_proba_batch(X)
    acc = float(((scores >= 0.5) == (y == 1)).mean())
    auc = roc_auc(scores, y)
    _timings["metrics"] = time.perf_counter() - t0
    elapsed = _timings["dataset"] + _timings["train"] + _timings["metrics"]
    ok = acc >= 0.90 and auc >= 0.90 and elapsed < 300.0
    _criterion(1, "classifier quality on synthetic pairs", ok,
               f"{len(full_dataset)} pairs, accuracy={acc:.5f}, auc={auc:.5f}, "
               f"runtime={elapsed:.1f}s")


def test_criterion_2_matching_toy_oracle():
    detections, gt = toy_instance()
    res = match_axes(detections, gt, MatchConfig(), ImageBounds(100.0, 100.0))
    ok = (res.precision == 0.6 and res.recall == 1.0
          and abs(res.f1 - 0.75) < 1e-12)
    _criterion(2, "six-detection matching oracle", ok,
               f"P={res.precision} R={res.recall} F1={res.f1!r}")


def test_criterion_3_metric_oracles():
    checks = [
        abs(entropy((1.0, 1.0)) - 1.0) < 1e-9,
        abs(entropy((5.0, 0.0)) - 0.0) < 1e-9,
        abs(entropy((1.0, 3.0)) - 0.8112781244591328) < 1e-9,
        balanced_weights((50, 50)) == (1.0, 1.0),
        abs(balanced_weights((40, 60))[0] - 1.25) < 1e-9,
        abs(balanced_weights((40, 60))[1] - 0.8333333333333334) < 1e-9,
        abs(balanced_weights((1, 99))[0] - 50.0) < 1e-9,
        abs(balanced_weights((1, 99))[1] - 0.5050505050505051) < 1e-9,
        abs(f1(0.5, 0.5) - 0.5) < 1e-9,
        abs(f1(0.6, 0.3) - 0.4) < 1e-9,
        f1(1.0, 0.0) == 0.0,
        roc_auc([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0]) == 0.75,
    ]
    rng = np.random.default_rng(31)
    exact = 0
    for _ in range(100):
        n = int(rng.integers(2, 1001))
        scores = np.round(rng.uniform(0, 1, n), 3)  # ties on purpose
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        pos = scores[labels == 1]
        neg = scores[labels == 0]
        wins = float((pos[:, None] > neg[None, :]).sum()
                     + 0.5 * (pos[:, None] == neg[None, :]).sum())
        brute = wins / (len(pos) * len(neg))
        exact += roc_auc(scores, labels) == brute
    ok = all(checks) and exact == 100
    _criterion(3, "entropy/weights/F1/AUC hand values and AUC brute force", ok,
               f"hand checks {sum(checks)}/{len(checks)}, exact AUC {exact}/100")


def test_criterion_4_harmonic_mean_bounds():
    rng = np.random.default_rng(4)
    p = rng.uniform(1e-12, 1.0, 10_000)
    r = rng.uniform(1e-12, 1.0, 10_000)
    vals = np.array([f1(a, b) for a, b in zip(p, r)])
    lo = np.minimum(p, r)
    hi = np.maximum(p, r)
    ok = bool(np.all(vals >= lo - 1e-12) and np.all(vals <= hi + 1e-12))
    _criterion(4, "harmonic-mean bounds over 10k random (P, R)", ok)


def test_criterion_5_mirror_detection_rate():
    hits = 0
    worst_time = 0.0
    count = 50
    for i in range(count):
        spec = PatternSpec(KIND_MIRROR, size=256, motif_seed=5000 + i,
                           noise_sigma=0.02)
        img, gt = generate(spec)
        t0 = time.perf_counter()
        axes = detect_axes(img, top_k=5, seed=0)
        worst_time = max(worst_time, time.perf_counter() - t0)
        if not axes:
            continue
        top = axes[0]
        truth = gt.axes[0]
        angle_err = angular_difference(orientation(top.segment), orientation(truth))
        offset = point_to_line_distance(top.segment.midpoint, truth)
        if math.degrees(angle_err) <= 5.0 and offset <= 0.05 * img.bounds.diagonal:
            hits += 1
    ok = hits >= 0.90 * count and worst_time < 10.0
    _criterion(5, "constructed-mirror detection rate", ok,
               f"{hits}/{count} within 5 deg / 5% diag, "
               f"slowest {worst_time:.2f}s per image")


def _rotation_paths_on_image(img, gt, model, cfg, mc):
    bounds = img.bounds
    axes = detect_axes(img, top_k=5, seed=0)
    rule_pool = dedup_axes(filter_axes(axes, cfg), cfg, bounds)
    rule_circles = []
    for i in range(len(rule_pool)):
        for j in range(i + 1, len(rule_pool)):
            cand = rule_rotation(rule_pool[i], rule_pool[j], cfg, bounds)
            if cand is not None:
                rule_circles.append(cand)
    rule_circles = dedup_circles(rule_circles, cfg, bounds)
    model_pool = dedup_axes(axes, cfg, bounds)
    model_circles = model_rotation(model_pool, model, cfg, bounds)
    gt_rot = list(gt.rotations)
    return (rotation_match_counts(rule_circles, gt_rot, mc, bounds),
            rotation_match_counts(model_circles, gt_rot, mc, bounds))


def test_criterion_6_end_to_end_rotations(table3_model):
    model, _, _ = table3_model
    cfg = PipelineConfig()
    mc = MatchConfig(rotation_center_tol=0.05)
    rule_totals = [0, 0, 0, 0]
    model_totals = [0, 0, 0, 0]
    gt_totals = [0, 0, 0, 0]
    for i in range(20):
        n = ORDERS[i % len(ORDERS)]
        spec = PatternSpec(KIND_DIHEDRAL, n=n, size=256, motif_seed=9000 + i,
                           noise_sigma=0.02)
        img, gt = generate(spec)
        rule_counts, model_counts = _rotation_paths_on_image(img, gt, model, cfg, mc)
        for totals, c in ((rule_totals, rule_counts), (model_totals, model_counts)):
            totals[0] += c.matched
            totals[1] += c.candidates
            totals[2] += c.gt_matched
            totals[3] += c.gt_total
    rule_f1 = RotationMatchCounts(*rule_totals).rates()[2]
    model_f1 = RotationMatchCounts(*model_totals).rates()[2]

    gt_input_totals = [0, 0, 0, 0]
    for i in range(20):
        n = ORDERS[i % len(ORDERS)]
        spec = PatternSpec(KIND_DIHEDRAL, n=n, size=256, motif_seed=9000 + i)
        gt = pattern_ground_truth(spec)
        bounds = gt.bounds
        gt_axes = [SymmetryAxis(seg, 1.0, 0, SOURCE_EXTERNAL) for seg in gt.axes]
        circles = model_rotation(gt_axes, model, cfg, bounds)
        c = rotation_match_counts(circles, list(gt.rotations), mc, bounds)
        gt_input_totals[0] += c.matched
        gt_input_totals[1] += c.candidates
        gt_input_totals[2] += c.gt_matched
        gt_input_totals[3] += c.gt_total
    gt_input_f1 = RotationMatchCounts(*gt_input_totals).rates()[2]

    ok = model_f1 >= rule_f1 and gt_input_f1 >= 0.8
    _criterion(6, "model path vs rule path rotation detection", ok,
               f"model F1={model_f1:.3f} >= rule F1={rule_f1:.3f}, "
               f"GT-input F1={gt_input_f1:.3f}")


def test_criterion_7_determinism(tmp_path):
    models = []
    for run in range(2):
        out = tmp_path / f"m{run}.json"
        rc = main(["train", "--synth-patterns", "2", "--synth-orders", "4",
                   "--size", "96", "--trees", "5", "--seed", "21",
                   "--out", str(out)])
        assert rc == 0
        models.append(out.read_bytes())
    img, _ = generate(PatternSpec(KIND_DIHEDRAL, n=4, size=128, motif_seed=77,
                                  noise_sigma=0.02))
    png = tmp_path / "img.png"
    img.save_png(png)
    axis_files = []
    for run in range(2):
        out = tmp_path / f"det{run}"
        rc = main(["detect", str(png), "--out-dir", str(out), "--seed", "13",
                   "--max-depth-recursion", "1"])
        assert rc == 0
        axis_files.append((out / "img.axes.txt").read_bytes())
    ok = models[0] == models[1] and axis_files[0] == axis_files[1]
    _criterion(7, "seeded training and detection are byte-identical", ok)


def test_criterion_8_structural_invariants(table3_model):
    model, train_part, _ = table3_model
    depth = max_tree_depth(model)
    min_gain = audit_split_gains(model, train_part)
    ok = depth <= 10 and min_gain >= -1e-9
    _criterion(8, "tree depth bound and non-negative split gains", ok,
               f"max depth={depth}, min gain={min_gain:.3e}")


def test_criterion_9_localization_contracts(monkeypatch):
    img, _ = generate(PatternSpec(KIND_DIHEDRAL, n=4, size=256, motif_seed=99,
                                  noise_sigma=0.02))
    cfg = PipelineConfig(max_recursion_depth=2)
    children_per_node: dict[int, int] = {}
    seen_frames = []  # keeps ids unique for the dict keys
    real_cut = localizer_mod.cut

    def counting_cut(frame, ax):
        out = real_cut(frame, ax)
        seen_frames.append(frame)
        key = id(frame)
        children_per_node[key] = children_per_node.get(key, 0) + len(out)
        return out

    monkeypatch.setattr(localizer_mod, "cut", counting_cut)
    axes = localize(img, cfg, lambda crop: detect_axes(crop, top_k=5, seed=0))
    bounds = img.bounds
    in_bounds = all(bounds.contains(ax.segment.p1) and bounds.contains(ax.segment.p2)
                    for ax in axes)
    max_children = max(children_per_node.values(), default=0)
    depth_ok = all(ax.depth <= 2 for ax in axes)

    rng = np.random.default_rng(9)
    remap_exact = True
    for _ in range(500):
        ox = float(rng.integers(0, 4096))
        global_coord = float(rng.uniform(ox, 4096))
        remap_exact &= ((global_coord - ox) + ox) == global_coord
    ok = in_bounds and max_children <= 6 and depth_ok and remap_exact
    _criterion(9, "localization bounds, fan-out, depth, remap", ok,
               f"axes={len(axes)}, max children per node={max_children}")


def test_criterion_10_filtering_oracle():
    cfg = PipelineConfig()  # 0.20 / 0.70 / 0.75
    axes_a = [axis(0, 0, 100, 10, 0.5), axis(0, 20, 100, 30, 0.4),
              axis(0, 40, 100, 50, 0.3)]
    kept_a = [ax.score for ax in filter_axes(axes_a, cfg)]
    axes_b = [axis(0, 0, 100, 10, 0.15), axis(0, 20, 100, 30, 0.10)]
    kept_b = filter_axes(axes_b, cfg)
    axes_c = [axis(0, 0, 100, 10, 1.0)]
    kept_c = [ax.score for ax in filter_axes(axes_c, cfg)]
    bounds = ImageBounds(100.0, 100.0)
    rejected = rule_rotation(axis(0, 50, 100, 50, 1.0),
                             axis(50, 0, 50, 100, 0.7), cfg, bounds)
    accepted = rule_rotation(axis(0, 50, 100, 50, 0.8),
                             axis(50, 0, 50, 100, 0.8), cfg, bounds)
    ok = (kept_a == [0.5, 0.4] and kept_b == [] and kept_c == [1.0]
          and rejected is None and accepted is not None)
    _criterion(10, "filtering and rule thresholds at stock values", ok,
               f"kept={kept_a}, weak-top={kept_b}, ratio-0.7 rejected="
               f"{rejected is None}")
