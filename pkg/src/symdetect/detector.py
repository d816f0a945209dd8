"""Baseline reflection-axis detector: gradient pair voting in a rho-theta
line accumulator, behind a pluggable interface so external axis files can
substitute for it.

For two edge points p and q, the perpendicular bisector of pq is the only
line that could mirror p onto q. Every sampled edge-point pair therefore
votes for its bisector, weighted by the product of the gradient magnitudes
and by how well the gradient direction at p maps onto the direction at q
under reflection across that bisector: random pairings score low on the
reflection test while genuine mirror pairs score near one. Peaks of the
smoothed accumulator are the axis hypotheses.

Pixel (row i, column j) has its centre at continuous coordinates
(j + 0.5, i + 0.5); an image of width W spans x in [0, W].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import ConfigError, ValidationError
from .geometry import ImageBounds, clip_line_to_rect
from .interchange import (SOURCE_BUILTIN, PipelineConfig, SymmetryAxis,
                          read_axis_file)

EDGE_PERCENTILE = 90.0
PAIR_BUDGET = 200_000
THETA_BINS = 180  # one-degree bins over [0, pi)
SMOOTH_SIGMA = 2.0  # accumulator bins
NMS_WINDOW = 5
MIN_IMAGE_SIDE = 16

# Fraction of the total cast vote mass that a strong mirror axis
# concentrates into its smoothed peak, measured on constructed mirror and
# dihedral images at 256 px; scores are peak/(this * total mass), so strong
# axes land near 1.0 while featureless noise stays under the default 0.20
# keep threshold.
SCORE_PEAK_FRACTION = 4e-4


@dataclass
class ImageRaster:
    """Grayscale raster with intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise ValidationError(f"raster must be 2-D and non-empty, got shape {px.shape}")
        if not np.isfinite(px).all():
            raise ValidationError("raster contains non-finite intensities")
        if px.min() < -1e-9 or px.max() > 1.0 + 1e-9:
            raise ValidationError("raster intensities outside [0, 1]")
        self.pixels = np.clip(px, 0.0, 1.0)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def bounds(self) -> ImageBounds:
        return ImageBounds(float(self.width), float(self.height))

    @classmethod
    def from_file(cls, path: str | Path) -> "ImageRaster":
        with Image.open(path) as img:
            gray = img.convert("L")  # 8-bit RGB collapsed by luminance
            return cls(np.asarray(gray, dtype=np.float64) / 255.0)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "ImageRaster":
        return cls(np.array(array, dtype=np.float64, copy=True))

    def crop(self, x0: int, y0: int, width: int, height: int) -> "ImageRaster":
        if x0 < 0 or y0 < 0 or width < 1 or height < 1 \
                or x0 + width > self.width or y0 + height > self.height:
            raise ValidationError(
                f"crop {width}x{height}+{x0}+{y0} outside {self.width}x{self.height}")
        return ImageRaster(self.pixels[y0:y0 + height, x0:x0 + width].copy())

    def save_png(self, path: str | Path) -> None:
        Image.fromarray((self.pixels * 255.0).round().astype(np.uint8)).save(path)


class HoughAccumulator:
    """Vote grid over (rho, theta): theta in [0, pi) at one-degree bins,
    rho in [-D, D] at one-pixel bins where D covers the image diagonal.

    The theta axis is periodic with a twist: (rho, theta + pi) describes the
    same line as (-rho, theta). Smoothing and non-maximum suppression honour
    that seam by extending the grid with rho-flipped wrapped columns.
    """

    def __init__(self, diagonal: float):
        if not diagonal > 0:
            raise ValidationError("accumulator needs a positive diagonal")
        self.diagonal = float(diagonal)
        self._r0 = int(math.ceil(diagonal)) + 1
        self.bins = np.zeros((2 * self._r0 + 1, THETA_BINS), dtype=np.float64)

    @property
    def rho_bins(self) -> int:
        return self.bins.shape[0]

    def add_votes(self, rho: np.ndarray, theta: np.ndarray,
                  weights: np.ndarray) -> None:
        rho = np.asarray(rho, dtype=np.float64)
        theta = np.asarray(theta, dtype=np.float64)
        weights = np.asarray(weights, dtype=np.float64)
        if weights.size and weights.min() < 0:
            raise ValidationError("vote weights must be non-negative")
        r_idx = np.clip(np.floor(rho).astype(np.int64) + self._r0, 0, self.rho_bins - 1)
        t_idx = np.clip((theta / math.pi * THETA_BINS).astype(np.int64), 0, THETA_BINS - 1)
        flat = np.bincount(r_idx * THETA_BINS + t_idx, weights=weights,
                           minlength=self.bins.size)
        self.bins += flat.reshape(self.bins.shape)

    def _extended(self, pad: int) -> np.ndarray:
        left = self.bins[::-1, THETA_BINS - pad:]
        right = self.bins[::-1, :pad]
        return np.concatenate([left, self.bins, right], axis=1)

    def smoothed(self, sigma: float = SMOOTH_SIGMA) -> np.ndarray:
        pad = max(NMS_WINDOW, int(math.ceil(3 * sigma)))
        ext = ndimage.gaussian_filter(self._extended(pad), sigma=sigma, mode="constant")
        return ext[:, pad:pad + THETA_BINS]

    def peaks(self, top_k: int, sigma: float = SMOOTH_SIGMA) -> list[tuple[float, float, float]]:
        """Top local maxima of the smoothed grid as (value, rho, theta),
        sorted by descending value with a deterministic index tie-break."""
        pad = max(NMS_WINDOW, int(math.ceil(3 * sigma)))
        ext = ndimage.gaussian_filter(self._extended(pad), sigma=sigma, mode="constant")
        local_max = ndimage.maximum_filter(ext, size=NMS_WINDOW, mode="constant")
        sm = ext[:, pad:pad + THETA_BINS]
        is_peak = (sm >= local_max[:, pad:pad + THETA_BINS]) & (sm > 0)
        rs, ts = np.nonzero(is_peak)
        if rs.size == 0:
            return []
        values = sm[rs, ts]
        order = np.lexsort((ts, rs, -values))[:top_k]
        out = []
        for k in order:
            rho = (float(rs[k]) - self._r0) + 0.5
            theta = (float(ts[k]) + 0.5) * math.pi / THETA_BINS
            out.append((float(values[k]), rho, theta))
        return out


def _edge_points(pixels: np.ndarray):
    gx = ndimage.sobel(pixels, axis=1)
    gy = ndimage.sobel(pixels, axis=0)
    mag = np.hypot(gx, gy)
    cutoff = np.percentile(mag, EDGE_PERCENTILE)
    ys, xs = np.nonzero(mag > cutoff)
    return xs + 0.5, ys + 0.5, mag[ys, xs], np.arctan2(gy[ys, xs], gx[ys, xs])


def _sample_pairs(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if n * (n - 1) // 2 <= PAIR_BUDGET:
        return np.triu_indices(n, k=1)
    rng = np.random.default_rng(seed)
    ii = rng.integers(0, n, PAIR_BUDGET)
    jj = rng.integers(0, n, PAIR_BUDGET)
    keep = ii != jj
    return ii[keep], jj[keep]


def detect_axes(img: ImageRaster, top_k: int = 5, seed: int = 0) -> list[SymmetryAxis]:
    """Score-sorted reflection-axis hypotheses; deterministic for a given
    image and seed. A gradient-free image yields no axes."""
    if top_k < 1:
        raise ValidationError("top_k must be >= 1")
    if img.width < MIN_IMAGE_SIDE or img.height < MIN_IMAGE_SIDE:
        raise ValidationError(
            f"image {img.width}x{img.height} below the {MIN_IMAGE_SIDE} px minimum")
    px, py, pmag, pang = _edge_points(img.pixels)
    if px.size < 2:
        return []
    ii, jj = _sample_pairs(px.size, seed)

    dx = px[jj] - px[ii]
    dy = py[jj] - py[ii]
    theta = np.arctan2(dy, dx) % math.pi
    theta[theta >= math.pi] = 0.0
    ct = np.cos(theta)
    st = np.sin(theta)
    rho = (px[ii] + px[jj]) * 0.5 * ct + (py[ii] + py[jj]) * 0.5 * st
    # Reflection across the bisector maps gradient direction phi_p onto
    # 2*axis_dir - phi_p; the cosine of the residual scores the agreement.
    axis_dir = theta + math.pi / 2.0
    consistency = np.cos(pang[ii] + pang[jj] - 2.0 * axis_dir)
    np.maximum(consistency, 0.0, out=consistency)
    weights = pmag[ii] * pmag[jj] * consistency
    cast = weights > 0
    if not cast.any():
        return []

    bounds = img.bounds
    acc = HoughAccumulator(bounds.diagonal)
    acc.add_votes(rho[cast], theta[cast], weights[cast])
    total_mass = float(weights[cast].sum())
    norm = SCORE_PEAK_FRACTION * total_mass

    axes: list[SymmetryAxis] = []
    for value, peak_rho, peak_theta in acc.peaks(top_k + 4):
        segment = clip_line_to_rect(peak_rho, peak_theta, bounds)
        if segment is None:
            continue
        score = min(1.0, value / norm)
        if score <= 0.0:
            continue
        axes.append(SymmetryAxis(segment, score, depth=0, source=SOURCE_BUILTIN))
        if len(axes) == top_k:
            break
    return axes


def detect_or_load(img: ImageRaster | None, axis_file: str | Path | None,
                   cfg: PipelineConfig, top_k: int = 5,
                   seed: int = 0) -> list[SymmetryAxis]:
    """External axis file wins when present; otherwise the builtin detector.

    cfg is accepted for interface symmetry with the rest of the pipeline;
    the builtin detector itself is threshold-free.
    """
    del cfg
    if axis_file is not None:
        axes, _ = read_axis_file(axis_file)
        return axes
    if img is not None:
        return detect_axes(img, top_k=top_k, seed=seed)
    raise ConfigError("no axis source: need an image or an axis file")
