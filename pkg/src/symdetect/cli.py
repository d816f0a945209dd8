"""Command-line entry point wiring the pipeline end to end.

Subcommands:

    detect     axes from an image (or an external axis file) -> axis file,
               JSON report, and an overlay PNG with depth-colored lines
    rotations  rotation circles from axis pairs, --rule or --model MODEL
    train      fit the decision forest on a dataset file or synthetic specs
    eval       max-F1 evaluation of detection files against ground truth
    synth      emit synthetic pattern images, ground truth, and datasets

Configuration: defaults < JSON file named by $SYMDETECT_CONFIG < flags.
Exit codes: 0 success, 2 validation/configuration, 3 I/O, 4 contract.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from pathlib import Path

from . import forest as forest_mod
from . import synthgen
from .detector import ImageRaster, detect_axes, detect_or_load
from .errors import (ConfigError, ContractError, ModelFormatError,
                     TrainingError, ValidationError)
from .evaluation import (EvalReport, MatchConfig, RotationMatchCounts,
                         rotation_match_counts, sweep_max_f1,
                         sweep_max_f1_pooled)
from .geometry import ImageBounds
from .interchange import (PipelineConfig, SymmetryDocument, read_axis_file,
                          read_ground_truth_file, read_rotations_file,
                          write_axis_file, write_document,
                          write_ground_truth_file, write_rotations_file)
from .localizer import localize
from .overlay import render_overlay
from .refine import dedup_axes, dedup_circles, filter_axes
from .rotation import model_rotation, rule_rotation

CONFIG_ENV_VAR = "SYMDETECT_CONFIG"
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_CONTRACT = 4


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sym-threshold", type=float, default=None,
                   help="minimum top-axis score per image or sub-image (default 0.20)")
    p.add_argument("--norm-threshold", type=float, default=None,
                   help="keep axes scoring at least this fraction of the top score "
                        "(default 0.70)")
    p.add_argument("--circle-threshold", type=float, default=None,
                   help="minimum score ratio for rule-based rotation pairs (default 0.75)")
    p.add_argument("--max-depth-recursion", dest="max_recursion_depth", type=int,
                   default=None, help="recursion depth for localized axes (default 3)")
    p.add_argument("--dedup-angle-eps", type=float, default=None,
                   help="axis similarity angle, radians (default 0.0873)")
    p.add_argument("--dedup-center-eps", type=float, default=None,
                   help="axis similarity centre distance, fraction of diagonal "
                        "(default 0.05)")
    p.add_argument("--model-threshold", dest="model_decision_threshold", type=float,
                   default=None, help="forest decision threshold (default 0.5)")


def load_pipeline_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, overridden by the $SYMDETECT_CONFIG file, overridden by flags."""
    data: dict = {}
    env_path = os.environ.get(CONFIG_ENV_VAR)
    if env_path:
        try:
            data.update(json.loads(Path(env_path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config file {env_path}: {exc}") from None
    for name in ("sym_threshold", "norm_threshold", "circle_threshold",
                 "max_recursion_depth", "dedup_angle_eps", "dedup_center_eps",
                 "model_decision_threshold"):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    return PipelineConfig.from_mapping(data)


def _stem(path: Path) -> str:
    return path.name.split(".")[0]


def _out_paths(out_dir: Path, stem: str) -> dict[str, Path]:
    return {
        "axes": out_dir / f"{stem}.axes.txt",
        "rotations": out_dir / f"{stem}.rotations.txt",
        "overlay": out_dir / f"{stem}.overlay.png",
        "report": out_dir / f"{stem}.report.json",
    }


# ---------------------------------------------------------------------------
# detect


def _detect_one(image_path: Path | None, axis_file: Path | None,
                cfg: PipelineConfig, args, out_dir: Path) -> str:
    if image_path is not None:
        raster = ImageRaster.from_file(image_path)
        stem = _stem(image_path)
    else:
        raster = None
        stem = _stem(axis_file)
    paths = _out_paths(out_dir, stem)

    if axis_file is not None:
        axes = detect_or_load(raster, axis_file, cfg, top_k=args.top_k, seed=args.seed)
        bounds = raster.bounds if raster is not None else _axis_file_bounds(axis_file)
        axes = dedup_axes(filter_axes(axes, cfg), cfg, bounds)
    else:
        axes = localize(raster,
                        cfg,
                        lambda crop: detect_axes(crop, top_k=args.top_k, seed=args.seed))
        bounds = raster.bounds

    write_axis_file(paths["axes"], axes, bounds)
    write_document(paths["report"], SymmetryDocument(
        image=str(image_path) if image_path else None,
        width=int(bounds.width), height=int(bounds.height), axes=tuple(axes)))
    if raster is not None:
        render_overlay(raster, axes, (), paths["overlay"])
    return stem


def _axis_file_bounds(axis_file: Path) -> ImageBounds:
    _, bounds = read_axis_file(axis_file)
    if bounds is None:
        raise ConfigError(
            f"{axis_file} declares no '# size W H' directive and no image was given")
    return bounds


def cmd_detect(args: argparse.Namespace) -> int:
    cfg = load_pipeline_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    axis_file = Path(args.axes) if args.axes else None
    if args.input is None and axis_file is None:
        raise ConfigError("need an image/directory argument or --axes FILE")
    if args.input is None:
        _detect_one(None, axis_file, cfg, args, out_dir)
        return EXIT_OK
    input_path = Path(args.input)
    if input_path.is_dir():
        images = sorted(p for p in input_path.iterdir()
                        if p.suffix.lower() in IMAGE_SUFFIXES)
        if not images:
            raise ValidationError(f"no images found in {input_path}")
        workers = max(1, args.workers)
        if workers == 1:
            for img in images:
                print(f"detect {_detect_one(img, None, cfg, args, out_dir)}")
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for stem in pool.map(
                        lambda p: _detect_one(p, None, cfg, args, out_dir), images):
                    print(f"detect {stem}")
        return EXIT_OK
    _detect_one(input_path, axis_file, cfg, args, out_dir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# rotations


def cmd_rotations(args: argparse.Namespace) -> int:
    cfg = load_pipeline_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    raster = ImageRaster.from_file(args.image) if args.image else None
    axis_file = Path(args.axes) if args.axes else None
    if raster is None and axis_file is None:
        raise ConfigError("need an image or --axes FILE")
    if raster is not None:
        bounds = raster.bounds
        stem = _stem(Path(args.image))
    else:
        bounds = _axis_file_bounds(axis_file)
        stem = _stem(axis_file)

    axes = detect_or_load(raster, axis_file, cfg, top_k=args.top_k, seed=args.seed)
    if args.model:
        model = forest_mod.load_model(args.model)
        # The model route keeps the full deduped list: weak axes may still
        # pair into a confident rotation, so filtering happens only on the
        # classifier side.
        pool = dedup_axes(axes, cfg, bounds) if axis_file is None else list(axes)
        circles = model_rotation(pool, model, cfg, bounds)
    else:
        pool = dedup_axes(filter_axes(axes, cfg), cfg, bounds) \
            if axis_file is None else list(axes)
        found = [c for a, b in combinations(pool, 2)
                 if (c := rule_rotation(a, b, cfg, bounds)) is not None]
        circles = dedup_circles(found, cfg, bounds)

    paths = _out_paths(out_dir, stem)
    write_rotations_file(paths["rotations"], circles)
    write_document(paths["report"], SymmetryDocument(
        image=args.image, width=int(bounds.width), height=int(bounds.height),
        axes=tuple(axes), rotations=tuple(circles)))
    if raster is not None:
        render_overlay(raster, axes, circles, paths["overlay"])
    print(f"rotations {stem}: {len(circles)} circle(s)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train


def _parse_orders(text: str) -> list[int]:
    try:
        orders = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"bad --synth-orders value {text!r}") from None
    if not orders:
        raise ValidationError("--synth-orders is empty")
    return orders


def cmd_train(args: argparse.Namespace) -> int:
    if args.dataset:
        data = forest_mod.read_dataset_file(args.dataset)
    elif args.synth_patterns:
        orders = _parse_orders(args.synth_orders)
        specs = [synthgen.PatternSpec(synthgen.KIND_DIHEDRAL, n=orders[i % len(orders)],
                                      size=args.size, motif_seed=args.seed + i)
                 for i in range(args.synth_patterns)]
        data = synthgen.build_pair_dataset(specs, negatives_ratio=args.negatives_ratio,
                                           seed=args.seed)
        if args.dataset_out:
            forest_mod.write_dataset_file(args.dataset_out, data)
    else:
        raise ConfigError("need --dataset FILE or --synth-patterns N")

    train_part, test_part = forest_mod.train_test_split(
        data, args.test_fraction, args.seed)
    cfg = forest_mod.ForestConfig(n_trees=args.trees, max_depth=args.max_depth,
                                  criterion=args.criterion,
                                  features_per_split=args.features_per_split,
                                  seed=args.seed)
    model = forest_mod.train(train_part, cfg)
    forest_mod.save_model(model, args.out)

    acc = forest_mod.accuracy(model, test_part)
    scores = model.predict_proba_batch(
        forest_mod.dataset_arrays(test_part)[0]).tolist()
    labels = [p.label for p in test_part]
    auc = forest_mod.roc_auc(scores, labels)
    print(f"trained {cfg.n_trees} trees (max_depth={cfg.max_depth}, "
          f"criterion={cfg.criterion}) on {len(train_part)} samples")
    print(f"held-out accuracy {acc:.5f}  auc {auc:.5f}  ({len(test_part)} samples)")
    if args.report:
        report = {
            "train_samples": len(train_part),
            "test_samples": len(test_part),
            "accuracy": acc,
            "auc": auc,
            "config": {"n_trees": cfg.n_trees, "max_depth": cfg.max_depth,
                       "criterion": cfg.criterion, "class_weight": cfg.class_weight,
                       "features_per_split": cfg.features_per_split,
                       "seed": cfg.seed},
            "roc_curve": forest_mod.roc_curve(scores, labels),
        }
        Path(args.report).write_text(json.dumps(report, indent=1) + "\n",
                                     encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval


def _report_payload(report: EvalReport) -> dict:
    return {
        "max_f1": report.max_f1,
        "best_threshold": report.best_threshold,
        "sweep": [
            {"threshold": t, "precision": p, "recall": r, "f1": f}
            for t, p, r, f in zip(report.thresholds, report.precisions,
                                  report.recalls, report.f1_scores)
        ],
        "assignments": [
            {"detection": a.detection, "status": a.status, "gt": a.gt_index}
            for a in report.assignments
        ],
    }


def _resolve_bounds(declared: ImageBounds | None, gt_bounds: ImageBounds | None,
                    args) -> ImageBounds:
    if declared is not None:
        return declared
    if gt_bounds is not None:
        return gt_bounds
    if args.image_size:
        return ImageBounds(float(args.image_size[0]), float(args.image_size[1]))
    raise ConfigError("no image size: declare '# size W H' in the files or pass "
                      "--image-size W H")


def cmd_eval(args: argparse.Namespace) -> int:
    mc = MatchConfig(angle_tol=math.radians(args.angle_tol),
                     center_tol=args.center_tol,
                     rotation_center_tol=args.rotation_tol)
    det_dir = Path(args.detections)
    gt_dir = Path(args.ground_truth)
    gt_files = {_stem(p): p for p in sorted(gt_dir.glob("*.txt"))}
    det_files = {_stem(p): p for p in sorted(det_dir.glob("*.txt"))}
    stems = sorted(set(gt_files) & set(det_files))
    unmatched = sorted(set(gt_files) ^ set(det_files))
    for stem in unmatched:
        print(f"warning: unmatched stem {stem}", file=sys.stderr)
    if not stems:
        raise ValidationError("no detection/ground-truth pairs to evaluate")

    per_image: dict[str, dict] = {}
    if args.kind == "axes":
        pooled_input = []
        for stem in stems:
            detections, declared = read_axis_file(det_files[stem])
            gt = read_ground_truth_file(gt_files[stem])
            bounds = _resolve_bounds(declared, gt.bounds, args)
            report = sweep_max_f1(detections, list(gt.axes), mc, bounds)
            per_image[stem] = _report_payload(report)
            pooled_input.append((detections, list(gt.axes), bounds))
        aggregate_report = sweep_max_f1_pooled(pooled_input, mc)
        aggregate = _report_payload(aggregate_report)
        if args.curve:
            lines = ["threshold\tprecision\trecall\tf1"]
            lines += [f"{t!r}\t{p!r}\t{r!r}\t{f!r}"
                      for t, p, r, f in zip(aggregate_report.thresholds,
                                            aggregate_report.precisions,
                                            aggregate_report.recalls,
                                            aggregate_report.f1_scores)]
            Path(args.curve).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"aggregate max_f1 {aggregate_report.max_f1:.5f} over {len(stems)} image(s)")
    else:
        totals = [0, 0, 0, 0]
        for stem in stems:
            candidates = read_rotations_file(det_files[stem])
            gt = read_ground_truth_file(gt_files[stem])
            bounds = _resolve_bounds(None, gt.bounds, args)
            counts = rotation_match_counts(candidates, list(gt.rotations), mc, bounds)
            p, r, f = counts.rates()
            per_image[stem] = {"precision": p, "recall": r, "f1": f,
                               "matched": counts.matched,
                               "candidates": counts.candidates,
                               "gt_matched": counts.gt_matched,
                               "gt_total": counts.gt_total}
            for i, v in enumerate((counts.matched, counts.candidates,
                                   counts.gt_matched, counts.gt_total)):
                totals[i] += v
        pooled = RotationMatchCounts(*totals)
        p, r, f = pooled.rates()
        aggregate = {"precision": p, "recall": r, "f1": f,
                     "matched": pooled.matched, "candidates": pooled.candidates,
                     "gt_matched": pooled.gt_matched, "gt_total": pooled.gt_total}
        print(f"aggregate rotation f1 {f:.5f} over {len(stems)} image(s)")

    payload = {"kind": args.kind, "images": per_image, "aggregate": aggregate,
               "unmatched_stems": unmatched}
    Path(args.out).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------------------
# synth


def cmd_synth(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    orders = _parse_orders(args.orders)
    specs = []
    for i in range(args.count):
        if args.kind == synthgen.KIND_DIHEDRAL:
            spec = synthgen.PatternSpec(args.kind, n=orders[i % len(orders)],
                                        size=args.size, motif_seed=args.seed + i,
                                        noise_sigma=args.noise)
        else:
            spec = synthgen.PatternSpec(args.kind, size=args.size,
                                        motif_seed=args.seed + i,
                                        noise_sigma=args.noise)
        specs.append(spec)
    for i, spec in enumerate(specs):
        raster, gt = synthgen.generate(spec)
        name = f"{spec.kind}{spec.n if spec.kind == synthgen.KIND_DIHEDRAL else ''}_{i:03d}"
        raster.save_png(out_dir / f"{name}.png")
        write_ground_truth_file(out_dir / f"{name}.gt.txt", gt)
        print(f"synth {name}: {len(gt.axes)} axes, {len(gt.rotations)} rotation(s)")
    if args.dataset_out:
        dihedral = [s for s in specs if s.kind == synthgen.KIND_DIHEDRAL]
        data = synthgen.build_pair_dataset(dihedral or specs,
                                           negatives_ratio=args.negatives_ratio,
                                           seed=args.seed)
        forest_mod.write_dataset_file(args.dataset_out, data)
        print(f"dataset {args.dataset_out}: {len(data)} labeled pairs")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


_EPILOG = """\
overlay colors: axes are colored by recursion depth
  0 blue, 1 green, 2 red, 3 orange, 4 purple, 5 cyan, 6 pink, 7+ white;
  rotation circles are always yellow.
exit codes: 0 ok, 2 validation/configuration, 3 i/o, 4 contract violation.
config file: $SYMDETECT_CONFIG may name a JSON file with PipelineConfig
  fields (sym_threshold, norm_threshold, circle_threshold,
  max_recursion_depth, dedup_angle_eps, dedup_center_eps,
  model_decision_threshold); explicit flags override it.
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symdetect",
        description="Reflection-axis detection and post-processing, localized "
                    "symmetry search, and rotational-symmetry classification.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect and refine reflection axes")
    p.add_argument("input", nargs="?", default=None,
                   help="image file or directory of images")
    p.add_argument("--axes", default=None,
                   help="external axis file (skips the builtin detector)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--top-k", type=int, default=5,
                   help="axes requested per image or sub-image (default 5)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1,
                   help="parallel images in directory mode (default 1)")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("rotations", help="rotation circles from axis pairs")
    p.add_argument("image", nargs="?", default=None)
    p.add_argument("--axes", default=None, help="external axis file")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--rule", action="store_true",
                      help="perpendicular similar-score rule")
    mode.add_argument("--model", default=None, help="trained forest model file")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_rotations)

    p = sub.add_parser("train", help="train the rotation-pair classifier")
    p.add_argument("--dataset", default=None, help="labeled dataset file")
    p.add_argument("--synth-patterns", type=int, default=None,
                   help="generate a synthetic dataset from this many dihedral patterns")
    p.add_argument("--synth-orders", default="2,3,4,6",
                   help="dihedral orders cycled over synthetic patterns")
    p.add_argument("--size", type=int, default=192, help="synthetic pattern size")
    p.add_argument("--negatives-ratio", type=float, default=1.0)
    p.add_argument("--dataset-out", default=None,
                   help="also write the generated dataset here")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=10)
    p.add_argument("--criterion", default="entropy", choices=["entropy"])
    p.add_argument("--features-per-split", type=int, default=4)
    p.add_argument("--test-fraction", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--report", default=None, help="JSON metrics report")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score detections against ground truth")
    p.add_argument("--detections", required=True, help="directory of detection files")
    p.add_argument("--ground-truth", required=True, help="directory of ground-truth files")
    p.add_argument("--kind", choices=["axes", "rotations"], default="axes")
    p.add_argument("--angle-tol", type=float, default=10.0,
                   help="axis matching tolerance, degrees (default 10)")
    p.add_argument("--center-tol", type=float, default=0.10,
                   help="axis centre tolerance, fraction of diagonal (default 0.10)")
    p.add_argument("--rotation-tol", type=float, default=0.05,
                   help="rotation centre tolerance, fraction of diagonal (default 0.05)")
    p.add_argument("--image-size", type=int, nargs=2, default=None,
                   metavar=("W", "H"), help="fallback image size")
    p.add_argument("--out", required=True, help="JSON report file")
    p.add_argument("--curve", default=None, help="plain-text P/R curve table")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate synthetic patterns and datasets")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--kind", choices=list(synthgen.KINDS), default=synthgen.KIND_DIHEDRAL)
    p.add_argument("--orders", default="2,3,4,6")
    p.add_argument("--count", type=int, default=8)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dataset-out", default=None)
    p.add_argument("--negatives-ratio", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ModelFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ContractError, TrainingError) as exc:
        print(f"contract error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
