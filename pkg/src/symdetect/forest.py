"""Decision-forest classifier built from scratch.

Trees are grown greedily on bootstrap samples: at each node a random subset
of features is examined, candidate thresholds are the midpoints between
consecutive distinct sorted values, and the split with the largest
information gain (entropy, in bits) wins. Growth stops at the depth bound,
on pure nodes, or when no split improves. Sample weights balance the two
classes so a skewed training set does not bias the leaves.

Determinism: tree i draws from a fresh generator seeded with (seed + i),
so training the same data with the same seed twice serializes
byte-identically. The model file is versioned JSON holding per-tree node
arrays (feature, threshold, left, right) plus leaf class masses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import (ContractError, ModelFormatError, ModelVersionError,
                     ParseError, TrainingError, ValidationError)
from .geometry import ImageBounds, line_intersection
from .interchange import SymmetryAxis
from .rotation import FEATURE_COUNT, LinePairFeatures, featurize, rotated_pair

MODEL_FORMAT = "symdetect-forest"
MODEL_VERSION = 1

ROTATION_STEP = math.radians(0.5)
ROTATION_COPIES = 720

_GAIN_FLOOR = 1e-12


@dataclass(frozen=True)
class LabeledPair:
    """A featurized axis pair with its rotational-symmetry label (1 = positive)."""

    features: LinePairFeatures
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValidationError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 10
    criterion: str = "entropy"
    class_weight: str = "balanced"
    features_per_split: int = 4  # ceil(sqrt(12))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValidationError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValidationError("max_depth must be >= 1")
        if self.criterion != "entropy":
            raise ValidationError(f"unsupported criterion {self.criterion!r}")
        if self.class_weight != "balanced":
            raise ValidationError(f"unsupported class_weight {self.class_weight!r}")
        if not (1 <= self.features_per_split <= FEATURE_COUNT):
            raise ValidationError("features_per_split outside [1, feature count]")


@dataclass
class Tree:
    """Flat preorder node arrays. feature == -1 marks a leaf; leaf class
    masses live in mass_neg/mass_pos (zero on internal nodes)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    mass_neg: np.ndarray
    mass_pos: np.ndarray

    def node_count(self) -> int:
        return int(self.feature.size)

    def depth(self) -> int:
        depths = np.zeros(self.node_count(), dtype=np.int32)
        deepest = 0
        for i in range(self.node_count()):
            d = int(depths[i])
            deepest = max(deepest, d)
            if self.feature[i] >= 0:
                depths[self.left[i]] = d + 1
                depths[self.right[i]] = d + 1
        return deepest

    def leaf_proba(self, X: np.ndarray) -> np.ndarray:
        """Positive-class proportion of the leaf each row lands in."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not active.any():
                break
            rows = np.nonzero(active)[0]
            at = node[rows]
            go_left = X[rows, feat[rows]] <= self.threshold[at]
            node[rows] = np.where(go_left, self.left[at], self.right[at])
        pos = self.mass_pos[node]
        return pos / (pos + self.mass_neg[node])


@dataclass
class DecisionForest:
    trees: list[Tree]
    config: ForestConfig
    feature_count: int = FEATURE_COUNT

    def predict_proba(self, features: LinePairFeatures | Sequence[float]) -> float:
        if isinstance(features, LinePairFeatures):
            row = features.as_tuple()
        else:
            row = tuple(float(v) for v in features)
        if len(row) != self.feature_count:
            raise ContractError(
                f"expected {self.feature_count} features, got {len(row)}")
        return float(self.predict_proba_batch(np.asarray([row], dtype=np.float64))[0])

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.feature_count:
            raise ContractError(
                f"expected shape (n, {self.feature_count}), got {X.shape}")
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.leaf_proba(X)
        return acc / len(self.trees)


# ---------------------------------------------------------------------------
# Splitting criteria


def entropy(class_masses: Sequence[float]) -> float:
    """Shannon entropy in bits of a two-class mass distribution."""
    m = tuple(float(v) for v in class_masses)
    if len(m) != 2:
        raise ValidationError("entropy expects exactly two class masses")
    if min(m) < 0:
        raise ValidationError("class masses must be non-negative")
    total = m[0] + m[1]
    if total <= 0:
        raise ContractError("entropy of zero total mass is undefined")
    h = 0.0
    for v in m:
        if v > 0:
            p = v / total
            h -= p * math.log2(p)
    return h


def balanced_weights(counts: Sequence[int]) -> tuple[float, ...]:
    """Per-class weights N / (K * N_c) that equalize class influence."""
    c = tuple(int(v) for v in counts)
    if any(v <= 0 for v in c):
        raise TrainingError(f"cannot balance classes with counts {c}")
    total = sum(c)
    k = len(c)
    return tuple(total / (k * v) for v in c)


def _binary_entropy_vec(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    for q in (p, 1.0 - p):
        nz = q > 0
        out[nz] -= q[nz] * np.log2(q[nz])
    return out


def _best_split(X: np.ndarray, sample_w: np.ndarray, pos_w: np.ndarray,
                idx: np.ndarray, feats: np.ndarray,
                parent_h: float) -> tuple[int, float] | None:
    """Highest-information-gain (feature, threshold) over the given features,
    or None when no candidate improves on the parent entropy."""
    w = sample_w[idx]
    p = pos_w[idx]
    total_w = w.sum()
    total_p = p.sum()
    best_gain = _GAIN_FLOOR
    best: tuple[int, float] | None = None
    for f in feats:
        col = X[idx, f]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        cw = np.cumsum(w[order])
        cp = np.cumsum(p[order])
        cuts = np.nonzero(sv[1:] > sv[:-1])[0]
        if cuts.size == 0:
            continue
        lw, lp = cw[cuts], cp[cuts]
        rw, rp = total_w - lw, total_p - lp
        child = (lw * _binary_entropy_vec(lp / lw) +
                 rw * _binary_entropy_vec(rp / rw)) / total_w
        gains = parent_h - child
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            lo, hi = float(sv[cuts[k]]), float(sv[cuts[k] + 1])
            thr = (lo + hi) / 2.0
            if thr >= hi:  # adjacent floats: keep the partition non-empty
                thr = lo
            best = (int(f), thr)
    return best


def _grow_tree(X: np.ndarray, y: np.ndarray, sample_w: np.ndarray,
               boot: np.ndarray, cfg: ForestConfig,
               rng: np.random.Generator) -> Tree:
    pos_w = sample_w * (y == 1)
    nodes: list[tuple[int, float, int, int, float, float]] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        nid = len(nodes)
        nodes.append((-1, 0.0, -1, -1, 0.0, 0.0))  # placeholder
        w = sample_w[idx]
        pos = float(pos_w[idx].sum())
        neg = float(w.sum() - pos)
        if depth >= cfg.max_depth or pos <= 0.0 or neg <= 0.0:
            nodes[nid] = (-1, 0.0, -1, -1, neg, pos)
            return nid
        feats = np.sort(rng.choice(FEATURE_COUNT, size=cfg.features_per_split,
                                   replace=False))
        split = _best_split(X, sample_w, pos_w, idx, feats, entropy((neg, pos)))
        if split is None:
            nodes[nid] = (-1, 0.0, -1, -1, neg, pos)
            return nid
        f, thr = split
        mask = X[idx, f] <= thr
        lid = grow(idx[mask], depth + 1)
        rid = grow(idx[~mask], depth + 1)
        nodes[nid] = (f, thr, lid, rid, 0.0, 0.0)
        return nid

    grow(boot, 0)
    arr = list(zip(*nodes))
    return Tree(feature=np.asarray(arr[0], dtype=np.int32),
                threshold=np.asarray(arr[1], dtype=np.float64),
                left=np.asarray(arr[2], dtype=np.int32),
                right=np.asarray(arr[3], dtype=np.int32),
                mass_neg=np.asarray(arr[4], dtype=np.float64),
                mass_pos=np.asarray(arr[5], dtype=np.float64))


def dataset_arrays(data: Iterable[LabeledPair]) -> tuple[np.ndarray, np.ndarray]:
    rows = [(p.features.as_tuple(), p.label) for p in data]
    if not rows:
        return (np.empty((0, FEATURE_COUNT)), np.empty((0,), dtype=np.int8))
    X = np.asarray([r[0] for r in rows], dtype=np.float64)
    y = np.asarray([r[1] for r in rows], dtype=np.int8)
    return X, y


def _sample_weights(y: np.ndarray) -> np.ndarray:
    n_neg = int((y == 0).sum())
    n_pos = int((y == 1).sum())
    w_neg, w_pos = balanced_weights((n_neg, n_pos))
    return np.where(y == 1, w_pos, w_neg)


def train(data: Iterable[LabeledPair] | tuple[np.ndarray, np.ndarray],
          cfg: ForestConfig) -> DecisionForest:
    """Grow cfg.n_trees bootstrap trees with balanced sample weights."""
    if isinstance(data, tuple):
        X = np.asarray(data[0], dtype=np.float64)
        y = np.asarray(data[1], dtype=np.int8)
    else:
        X, y = dataset_arrays(data)
    n = X.shape[0]
    if n < 2:
        raise TrainingError("need at least 2 training samples")
    if X.shape[1] != FEATURE_COUNT:
        raise ContractError(f"expected {FEATURE_COUNT} features, got {X.shape[1]}")
    if (y == 1).sum() == 0 or (y == 0).sum() == 0:
        raise TrainingError("training data contains a single class")
    sample_w = _sample_weights(y)
    trees = []
    for i in range(cfg.n_trees):
        rng = np.random.default_rng(cfg.seed + i)
        boot = rng.integers(0, n, n) if cfg.bootstrap else np.arange(n)
        trees.append(_grow_tree(X, y, sample_w, boot, cfg, rng))
    return DecisionForest(trees, cfg, FEATURE_COUNT)


# ---------------------------------------------------------------------------
# Augmentation


def augment_rotations(a: SymmetryAxis, b: SymmetryAxis,
                      bounds: ImageBounds) -> list[LabeledPair]:
    """720 positive copies of a crossing pair, rotated about the crossing
    in half-degree steps (the full-turn copy duplicates the original)."""
    center = line_intersection(a.segment, b.segment)
    if center is None:
        raise ContractError("cannot augment a pair without an intersection")
    out = []
    for k in range(1, ROTATION_COPIES + 1):
        ra, rb = rotated_pair(a, b, center, k * ROTATION_STEP)
        out.append(LabeledPair(featurize(ra, rb, bounds), 1))
    return out


# ---------------------------------------------------------------------------
# Metrics


def accuracy(model: DecisionForest, data: Iterable[LabeledPair],
             threshold: float = 0.5) -> float:
    X, y = dataset_arrays(data)
    if X.shape[0] == 0:
        raise ValidationError("accuracy of an empty data set is undefined")
    pred = model.predict_proba_batch(X) >= threshold
    return float((pred == (y == 1)).mean())


def _tie_averaged_ranks(scores: np.ndarray) -> np.ndarray:
    n = scores.size
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
    ends = np.r_[starts[1:], n]
    avg = (starts + ends + 1) / 2.0  # 1-based rank averaged over each tie group
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Probability a random positive outscores a random negative, ties 1/2."""
    s = np.asarray(scores, dtype=np.float64)
    lab = np.asarray(labels)
    if s.shape != lab.shape or s.ndim != 1:
        raise ContractError("scores and labels must be equal-length 1-D sequences")
    pos = lab == 1
    n_pos = int(pos.sum())
    n_neg = int(s.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ContractError("AUC needs both classes present")
    ranks = _tie_averaged_ranks(s)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_curve(scores: Sequence[float], labels: Sequence[int]
              ) -> list[tuple[float, float, float]]:
    """(threshold, false-positive rate, true-positive rate) rows, one per
    distinct score, thresholds descending."""
    s = np.asarray(scores, dtype=np.float64)
    lab = np.asarray(labels)
    pos = lab == 1
    n_pos = int(pos.sum())
    n_neg = int(s.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ContractError("ROC needs both classes present")
    rows = []
    for t in sorted(set(s.tolist()), reverse=True):
        kept = s >= t
        tp = int((kept & pos).sum())
        fp = int((kept & ~pos).sum())
        rows.append((float(t), fp / n_neg, tp / n_pos))
    return rows


def train_test_split(data: list[LabeledPair], test_fraction: float,
                     seed: int) -> tuple[list[LabeledPair], list[LabeledPair]]:
    if not (0.0 < test_fraction < 1.0):
        raise ValidationError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(data))
    n_test = max(1, int(round(len(data) * test_fraction)))
    test_idx = set(order[:n_test].tolist())
    train_part = [data[i] for i in range(len(data)) if i not in test_idx]
    test_part = [data[i] for i in sorted(test_idx)]
    return train_part, test_part


# ---------------------------------------------------------------------------
# Structural audits


def max_tree_depth(model: DecisionForest) -> int:
    return max(tree.depth() for tree in model.trees)


def audit_split_gains(model: DecisionForest,
                      data: Iterable[LabeledPair] | tuple[np.ndarray, np.ndarray]
                      ) -> float:
    """Replay the training data through every tree and return the smallest
    information gain over all internal nodes. Requires the exact data and
    seed the model was trained with."""
    if isinstance(data, tuple):
        X = np.asarray(data[0], dtype=np.float64)
        y = np.asarray(data[1], dtype=np.int8)
    else:
        X, y = dataset_arrays(data)
    sample_w = _sample_weights(y)
    pos_w = sample_w * (y == 1)
    n = X.shape[0]
    min_gain = math.inf
    for i, tree in enumerate(model.trees):
        rng = np.random.default_rng(model.config.seed + i)
        boot = rng.integers(0, n, n) if model.config.bootstrap else np.arange(n)
        stack = [(0, boot)]
        while stack:
            nid, idx = stack.pop()
            if tree.feature[nid] < 0:
                continue
            w = sample_w[idx]
            pos = float(pos_w[idx].sum())
            neg = float(w.sum() - pos)
            parent_h = entropy((neg, pos))
            mask = X[idx, tree.feature[nid]] <= tree.threshold[nid]
            halves = []
            for part in (idx[mask], idx[~mask]):
                pw = sample_w[part]
                ppos = float(pos_w[part].sum())
                pneg = float(pw.sum() - ppos)
                h = entropy((pneg, ppos)) if pneg + ppos > 0 else 0.0
                halves.append((pneg + ppos, h))
            total = neg + pos
            child_h = sum(mass * h for mass, h in halves) / total
            min_gain = min(min_gain, parent_h - child_h)
            stack.append((int(tree.left[nid]), idx[mask]))
            stack.append((int(tree.right[nid]), idx[~mask]))
    return min_gain


# ---------------------------------------------------------------------------
# Serialization


def save_model(model: DecisionForest, path: str | Path) -> None:
    cfg = model.config
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "feature_count": model.feature_count,
        "config": {
            "n_trees": cfg.n_trees,
            "max_depth": cfg.max_depth,
            "criterion": cfg.criterion,
            "class_weight": cfg.class_weight,
            "features_per_split": cfg.features_per_split,
            "bootstrap": cfg.bootstrap,
            "seed": cfg.seed,
        },
        "trees": [
            {
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "mass_neg": t.mass_neg.tolist(),
                "mass_pos": t.mass_pos.tolist(),
            }
            for t in model.trees
        ],
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_model(path: str | Path) -> DecisionForest:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"corrupt model file {path}: {exc}") from None
    if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path} is not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise ModelVersionError(
            f"{path} declares version {payload.get('version')!r}, "
            f"this build reads version {MODEL_VERSION}")
    try:
        cfg = ForestConfig(**payload["config"])
        feature_count = int(payload["feature_count"])
        trees = []
        for t in payload["trees"]:
            tree = Tree(feature=np.asarray(t["feature"], dtype=np.int32),
                        threshold=np.asarray(t["threshold"], dtype=np.float64),
                        left=np.asarray(t["left"], dtype=np.int32),
                        right=np.asarray(t["right"], dtype=np.int32),
                        mass_neg=np.asarray(t["mass_neg"], dtype=np.float64),
                        mass_pos=np.asarray(t["mass_pos"], dtype=np.float64))
            n = tree.node_count()
            sizes = {tree.threshold.size, tree.left.size, tree.right.size,
                     tree.mass_neg.size, tree.mass_pos.size}
            if sizes != {n} or n == 0:
                raise ValueError("ragged node arrays")
            if tree.feature.max(initial=-1) >= feature_count:
                raise ValueError("feature index out of range")
            internal = tree.feature >= 0
            parents = np.nonzero(internal)[0]
            kids = np.concatenate([tree.left[internal], tree.right[internal]])
            if kids.size and (kids.min() < 0 or kids.max() >= n):
                raise ValueError("child index out of range")
            # preorder: children always follow their parent, so routing
            # strictly advances and cannot cycle
            if kids.size and not (np.all(tree.left[parents] > parents)
                                  and np.all(tree.right[parents] > parents)):
                raise ValueError("node arrays are not in preorder")
            leaves = ~internal
            if np.any((tree.mass_neg[leaves] + tree.mass_pos[leaves]) <= 0):
                raise ValueError("leaf with zero class mass")
            trees.append(tree)
        if len(trees) != cfg.n_trees:
            raise ValueError("tree count disagrees with config")
    except (KeyError, TypeError, ValueError, ValidationError) as exc:
        raise ModelFormatError(f"malformed model file {path}: {exc}") from None
    return DecisionForest(trees, cfg, feature_count)


# ---------------------------------------------------------------------------
# Labeled-dataset text format: 12 comma-separated features + label per line


def write_dataset(stream: IO[str], pairs: Iterable[LabeledPair]) -> None:
    for p in pairs:
        values = ",".join(repr(float(v)) for v in p.features.as_tuple())
        stream.write(f"{values},{p.label}\n")


def read_dataset(stream: IO[str], path: str | None = None) -> list[LabeledPair]:
    out = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != FEATURE_COUNT + 1:
            raise ParseError(f"expected {FEATURE_COUNT + 1} fields, got {len(parts)}",
                             path=path, line=lineno)
        try:
            features = LinePairFeatures(*(float(v) for v in parts[:-1]))
            label = int(parts[-1])
        except ValueError as exc:
            raise ParseError(f"unparseable value ({exc})", path=path, line=lineno) from None
        out.append(LabeledPair(features, label))
    return out


def write_dataset_file(path: str | Path, pairs: Iterable[LabeledPair]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        write_dataset(fh, pairs)


def read_dataset_file(path: str | Path) -> list[LabeledPair]:
    with Path(path).open("r", encoding="utf-8") as fh:
        return read_dataset(fh, path=str(path))
