"""symdetect: reflection-symmetry post-processing, localized symmetry
search, and rotational-symmetry classification for 2D images."""

from .detector import HoughAccumulator, ImageRaster, detect_axes, detect_or_load
from .evaluation import (EvalReport, MatchConfig, f1, match_axes,
                         match_rotations, sweep_max_f1)
from .forest import (DecisionForest, ForestConfig, LabeledPair, accuracy,
                     augment_rotations, balanced_weights, entropy, load_model,
                     roc_auc, save_model, train)
from .geometry import (ImageBounds, Point, Segment, angular_difference,
                       line_intersection, orientation, rotate_about,
                       segment_length)
from .interchange import (GroundTruth, GroundTruthRotation, PipelineConfig,
                          RotationCandidate, SymmetryAxis, read_axes,
                          read_ground_truth, write_axes, write_ground_truth)
from .localizer import SubImageFrame, cut, localize
from .refine import dedup_axes, dedup_circles, filter_axes
from .rotation import LinePairFeatures, featurize, model_rotation, rule_rotation
from .synthgen import PatternSpec, build_pair_dataset, generate

__version__ = "0.1.0"

__all__ = [
    "DecisionForest", "EvalReport", "ForestConfig", "GroundTruth",
    "GroundTruthRotation", "HoughAccumulator", "ImageBounds", "ImageRaster",
    "LabeledPair", "LinePairFeatures", "MatchConfig", "PatternSpec",
    "PipelineConfig", "Point", "RotationCandidate", "Segment", "SubImageFrame",
    "SymmetryAxis", "accuracy", "angular_difference", "augment_rotations",
    "balanced_weights", "build_pair_dataset", "cut", "dedup_axes",
    "dedup_circles", "detect_axes", "detect_or_load", "entropy", "f1",
    "featurize", "filter_axes", "generate", "line_intersection", "load_model",
    "localize", "match_axes", "match_rotations", "model_rotation",
    "orientation", "read_axes", "read_ground_truth", "roc_auc", "rotate_about",
    "rule_rotation", "save_model", "segment_length", "sweep_max_f1", "train",
    "write_axes", "write_ground_truth",
]
