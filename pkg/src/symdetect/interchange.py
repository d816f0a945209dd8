"""Canonical data model and text formats for axes, circles, ground truth,
and pipeline configuration.

Flat axis file: UTF-8 text, one axis per line,

    x1,y1,x2,y2,score[,depth]

"#" starts a comment line. The directive comment ``# size <width> <height>``
declares the image bounds; when present, axis endpoints are validated
against it. Ground-truth files use the same segment syntax without a score
plus rotation-centre records ``R,cx,cy[,radius]``. Rotation-candidate files
carry ``cx,cy,radius,confidence,provenance`` records. A JSON document format
bundles image path, size, axes, and circles into a single report.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from .errors import ParseError, ValidationError
from .geometry import ImageBounds, Point, Segment

SOURCE_BUILTIN = "builtin"
SOURCE_EXTERNAL = "external"
_SOURCES = (SOURCE_BUILTIN, SOURCE_EXTERNAL)

PROVENANCE_RULE = "rule"
PROVENANCE_MODEL = "model"
_PROVENANCES = (PROVENANCE_RULE, PROVENANCE_MODEL)

DOCUMENT_FORMAT = "symdetect-report"
DOCUMENT_VERSION = 1


@dataclass(frozen=True)
class SymmetryAxis:
    """A scored reflection-axis segment in image coordinates."""

    segment: Segment
    score: float
    depth: int = 0
    source: str = SOURCE_BUILTIN

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"axis score {self.score} outside [0, 1]")
        if self.depth < 0:
            raise ValidationError(f"axis depth {self.depth} is negative")
        if self.source not in _SOURCES:
            raise ValidationError(f"unknown axis source {self.source!r}")


@dataclass(frozen=True)
class RotationCandidate:
    """A scored rotational-symmetry circle."""

    center: Point
    radius: float
    confidence: float
    provenance: str

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValidationError(f"circle radius {self.radius} must be positive")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"circle confidence {self.confidence} outside [0, 1]")
        if self.provenance not in _PROVENANCES:
            raise ValidationError(f"unknown circle provenance {self.provenance!r}")


@dataclass(frozen=True)
class GroundTruthRotation:
    center: Point
    radius: float | None = None

    def __post_init__(self) -> None:
        if self.radius is not None and not self.radius > 0:
            raise ValidationError(f"ground-truth radius {self.radius} must be positive")


@dataclass(frozen=True)
class GroundTruth:
    """Human- or construction-labelled symmetries for one image."""

    axes: tuple[Segment, ...] = ()
    rotations: tuple[GroundTruthRotation, ...] = ()
    width: int | None = None
    height: int | None = None

    @property
    def bounds(self) -> ImageBounds | None:
        if self.width is None or self.height is None:
            return None
        return ImageBounds(float(self.width), float(self.height))


@dataclass(frozen=True)
class PipelineConfig:
    """Thresholds and limits shared by the detection pipeline.

    sym_threshold: minimum score the best axis of an image (or sub-image)
        must reach for any of its axes to be kept.
    norm_threshold: axes scoring below this fraction of the best kept
        score are dropped.
    circle_threshold: minimum ratio min(score)/max(score) for an axis pair
        to yield a rule-based rotation candidate.
    """

    sym_threshold: float = 0.20
    norm_threshold: float = 0.70
    circle_threshold: float = 0.75
    max_recursion_depth: int = 3
    dedup_angle_eps: float = 0.0873  # radians, about 5 degrees
    dedup_center_eps: float = 0.05  # fraction of the image diagonal
    model_decision_threshold: float = 0.5

    def __post_init__(self) -> None:
        for name in ("sym_threshold", "norm_threshold", "circle_threshold",
                     "dedup_center_eps", "model_decision_threshold"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"{name}={v} outside [0, 1]")
        if self.max_recursion_depth < 0:
            raise ValidationError("max_recursion_depth must be >= 0")
        if self.dedup_angle_eps < 0:
            raise ValidationError("dedup_angle_eps must be >= 0")

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**mapping)


def axis_sort_key(axis: SymmetryAxis):
    """Descending score with a deterministic coordinate tie-break."""
    s = axis.segment
    return (-axis.score, s.p1.x, s.p1.y, s.p2.x, s.p2.y, axis.depth)


# ---------------------------------------------------------------------------
# Flat text formats


def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_floats(parts: list[str], lineno: int, path: str | None) -> list[float]:
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ParseError(f"unparseable number ({exc})", path=path, line=lineno) from None
    for v in values:
        if not math.isfinite(v):
            raise ParseError(f"non-finite value {v}", path=path, line=lineno)
    return values


def _scan_lines(stream: IO[str]):
    """Yield (lineno, payload, size) with comments stripped and the
    '# size W H' directive decoded."""
    size = None
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if line.startswith("#"):
            fields = line[1:].split()
            if len(fields) == 3 and fields[0].lower() == "size":
                try:
                    size = (int(fields[1]), int(fields[2]))
                except ValueError:
                    raise ParseError("bad size directive", line=lineno) from None
            continue
        if not line:
            continue
        yield lineno, line, size


def read_axes(stream: IO[str], path: str | None = None) -> list[SymmetryAxis]:
    """Parse a flat axis file. Axes read from files are tagged external."""
    axes: list[SymmetryAxis] = []
    declared: ImageBounds | None = None
    for lineno, line, size in _scan_lines(stream):
        if size is not None and declared is None:
            declared = ImageBounds(float(size[0]), float(size[1]))
        parts = line.split(",")
        if len(parts) not in (5, 6):
            raise ParseError(f"expected 5 or 6 fields, got {len(parts)}", path=path, line=lineno)
        values = _parse_floats(parts, lineno, path)
        depth = 0
        if len(values) == 6:
            if values[5] != int(values[5]) or values[5] < 0:
                raise ParseError(f"depth {values[5]} is not a non-negative integer",
                                 path=path, line=lineno)
            depth = int(values[5])
        try:
            segment = Segment(Point(values[0], values[1]), Point(values[2], values[3]))
            axis = SymmetryAxis(segment, values[4], depth=depth, source=SOURCE_EXTERNAL)
        except (ValueError, ValidationError) as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        if declared is not None:
            for p in (segment.p1, segment.p2):
                if not declared.contains(p):
                    raise ValidationError(
                        f"line {lineno}: endpoint ({p.x}, {p.y}) outside declared "
                        f"bounds {declared.width:g}x{declared.height:g}")
        axes.append(axis)
    return axes


def write_axes(stream: IO[str], axes: Iterable[SymmetryAxis],
               bounds: ImageBounds | None = None) -> None:
    if bounds is not None:
        stream.write(f"# size {int(bounds.width)} {int(bounds.height)}\n")
    for ax in axes:
        s = ax.segment
        stream.write(
            f"{_fmt(s.p1.x)},{_fmt(s.p1.y)},{_fmt(s.p2.x)},{_fmt(s.p2.y)},"
            f"{_fmt(ax.score)},{ax.depth}\n")


def read_axis_file(path: str | Path) -> tuple[list[SymmetryAxis], ImageBounds | None]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        text = fh.read()
    bounds = None
    for _, _, size in _scan_lines(iter(text.splitlines(True))):
        if size is not None:
            bounds = ImageBounds(float(size[0]), float(size[1]))
            break
    return read_axes(iter(text.splitlines(True)), path=str(path)), bounds


def write_axis_file(path: str | Path, axes: Iterable[SymmetryAxis],
                    bounds: ImageBounds | None = None) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        write_axes(fh, axes, bounds)


def read_ground_truth(stream: IO[str], path: str | None = None) -> GroundTruth:
    axes: list[Segment] = []
    rotations: list[GroundTruthRotation] = []
    width = height = None
    for lineno, line, size in _scan_lines(stream):
        if size is not None:
            width, height = size
        parts = line.split(",")
        if parts[0].strip().upper() == "R":
            if len(parts) not in (3, 4):
                raise ParseError("rotation record needs R,cx,cy[,radius]", path=path, line=lineno)
            values = _parse_floats(parts[1:], lineno, path)
            radius = values[2] if len(values) == 3 else None
            try:
                rotations.append(GroundTruthRotation(Point(values[0], values[1]), radius))
            except (ValueError, ValidationError) as exc:
                raise ValidationError(f"line {lineno}: {exc}") from None
            continue
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields for a segment, got {len(parts)}",
                             path=path, line=lineno)
        values = _parse_floats(parts, lineno, path)
        try:
            axes.append(Segment(Point(values[0], values[1]), Point(values[2], values[3])))
        except ValueError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    return GroundTruth(tuple(axes), tuple(rotations), width, height)


def write_ground_truth(stream: IO[str], gt: GroundTruth) -> None:
    if gt.width is not None and gt.height is not None:
        stream.write(f"# size {gt.width} {gt.height}\n")
    for seg in gt.axes:
        stream.write(f"{_fmt(seg.p1.x)},{_fmt(seg.p1.y)},{_fmt(seg.p2.x)},{_fmt(seg.p2.y)}\n")
    for rot in gt.rotations:
        if rot.radius is None:
            stream.write(f"R,{_fmt(rot.center.x)},{_fmt(rot.center.y)}\n")
        else:
            stream.write(f"R,{_fmt(rot.center.x)},{_fmt(rot.center.y)},{_fmt(rot.radius)}\n")


def read_ground_truth_file(path: str | Path) -> GroundTruth:
    with Path(path).open("r", encoding="utf-8") as fh:
        return read_ground_truth(fh, path=str(path))


def write_ground_truth_file(path: str | Path, gt: GroundTruth) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        write_ground_truth(fh, gt)


def read_rotations(stream: IO[str], path: str | None = None) -> list[RotationCandidate]:
    out: list[RotationCandidate] = []
    for lineno, line, _ in _scan_lines(stream):
        parts = line.split(",")
        if len(parts) != 5:
            raise ParseError(f"expected 5 fields, got {len(parts)}", path=path, line=lineno)
        values = _parse_floats(parts[:4], lineno, path)
        provenance = parts[4].strip()
        try:
            out.append(RotationCandidate(Point(values[0], values[1]), values[2],
                                         values[3], provenance))
        except (ValueError, ValidationError) as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
    return out


def write_rotations(stream: IO[str], circles: Iterable[RotationCandidate]) -> None:
    for c in circles:
        stream.write(f"{_fmt(c.center.x)},{_fmt(c.center.y)},{_fmt(c.radius)},"
                     f"{_fmt(c.confidence)},{c.provenance}\n")


def read_rotations_file(path: str | Path) -> list[RotationCandidate]:
    with Path(path).open("r", encoding="utf-8") as fh:
        return read_rotations(fh, path=str(path))


def write_rotations_file(path: str | Path, circles: Iterable[RotationCandidate]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        write_rotations(fh, circles)


# ---------------------------------------------------------------------------
# Structured per-image document (JSON)


@dataclass(frozen=True)
class SymmetryDocument:
    image: str | None
    width: int
    height: int
    axes: tuple[SymmetryAxis, ...] = ()
    rotations: tuple[RotationCandidate, ...] = ()

    @property
    def bounds(self) -> ImageBounds:
        return ImageBounds(float(self.width), float(self.height))


def write_document(path: str | Path, doc: SymmetryDocument) -> None:
    payload = {
        "format": DOCUMENT_FORMAT,
        "version": DOCUMENT_VERSION,
        "image": doc.image,
        "width": doc.width,
        "height": doc.height,
        "axes": [
            {"x1": a.segment.p1.x, "y1": a.segment.p1.y,
             "x2": a.segment.p2.x, "y2": a.segment.p2.y,
             "score": a.score, "depth": a.depth, "source": a.source}
            for a in doc.axes
        ],
        "rotations": [
            {"cx": c.center.x, "cy": c.center.y, "radius": c.radius,
             "confidence": c.confidence, "provenance": c.provenance}
            for c in doc.rotations
        ],
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def read_document(path: str | Path) -> SymmetryDocument:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON document ({exc})", path=str(path)) from None
    if not isinstance(payload, dict) or payload.get("format") != DOCUMENT_FORMAT:
        raise ParseError("not a symmetry report document", path=str(path))
    if payload.get("version") != DOCUMENT_VERSION:
        raise ParseError(f"unsupported document version {payload.get('version')}",
                         path=str(path))
    try:
        axes = tuple(
            SymmetryAxis(Segment(Point(a["x1"], a["y1"]), Point(a["x2"], a["y2"])),
                         a["score"], depth=a["depth"], source=a["source"])
            for a in payload["axes"])
        rotations = tuple(
            RotationCandidate(Point(c["cx"], c["cy"]), c["radius"],
                              c["confidence"], c["provenance"])
            for c in payload["rotations"])
        return SymmetryDocument(payload["image"], int(payload["width"]),
                                int(payload["height"]), axes, rotations)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed document field ({exc})", path=str(path)) from None
