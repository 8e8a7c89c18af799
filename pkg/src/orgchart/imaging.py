"""Raster helpers, histograms and the thresholding strategies.

Rasters are plain ``numpy.uint8`` arrays, ``(H, W)`` for gray and
``(H, W, 3)`` for RGB.  Binary masks use 0 for foreground (ink) and 255 for
background.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image
from scipy import ndimage

from orgchart._io import atomic_write_bytes

FOREGROUND = 0
BACKGROUND = 255
MAX_INTENSITY = 255


class NoJunctionPointsError(ValueError):
    """Junction-window OTSU needs at least one point; fall back to whole-image OTSU."""


def _check_raster(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim not in (2, 3):
        raise ValueError(f"raster must be 2-D or 3-D, got shape {img.shape}")
    if img.dtype != np.uint8:
        if img.size and (img.min() < 0 or img.max() > 255):
            raise ValueError("raster values must lie in [0, 255]")
        img = img.astype(np.uint8)
    return img


def grayscale(img: np.ndarray) -> np.ndarray:
    """Luma conversion ``round(0.299 R + 0.587 G + 0.114 B)``; gray input is returned as is."""
    img = _check_raster(img)
    if img.ndim == 2:
        return img
    if img.shape[2] == 1:
        return img[:, :, 0]
    if img.shape[2] != 3:
        raise ValueError(f"unsupported channel count {img.shape[2]}")
    rgb = img.astype(np.float64)
    gray = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.floor(gray + 0.5), 0, 255).astype(np.uint8)


# -- PNG codec ---------------------------------------------------------------

def read_png(path: str | Path) -> np.ndarray:
    """Load a PNG as 8-bit gray or RGB.  Alpha is flattened over white."""
    with Image.open(path) as im:
        im.load()
        if im.mode in ("I;16", "I;16B", "I;16L", "I"):
            arr = np.asarray(im, dtype=np.float64)
            top = 65535.0 if arr.max(initial=0) > 255 or im.mode.startswith("I;16") else 255.0
            return np.clip(np.floor(arr * 255.0 / top + 0.5), 0, 255).astype(np.uint8)
        if im.mode == "P":
            im = im.convert("RGBA")
        if im.mode in ("RGBA", "LA"):
            rgba = np.asarray(im.convert("RGBA"), dtype=np.float64)
            alpha = rgba[..., 3:4] / 255.0
            rgb = rgba[..., :3] * alpha + 255.0 * (1.0 - alpha)
            out = np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)
            return out[..., 0] if im.mode == "LA" else out
        if im.mode in ("1", "L"):
            return np.asarray(im.convert("L"), dtype=np.uint8).copy()
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def png_bytes(img: np.ndarray) -> bytes:
    img = _check_raster(img)
    buf = io.BytesIO()
    Image.fromarray(img).save(buf, format="PNG")
    return buf.getvalue()


def write_png(path: str | Path, img: np.ndarray) -> None:
    atomic_write_bytes(path, png_bytes(img))


# -- histograms and OTSU ------------------------------------------------------

@dataclass(frozen=True)
class Histogram:
    counts: np.ndarray  # 256 integer bins
    total: int

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "Histogram":
        arr = np.asarray(counts, dtype=np.int64)
        if arr.shape != (256,):
            raise ValueError("histogram needs exactly 256 bins")
        if (arr < 0).any():
            raise ValueError("histogram counts must be non-negative")
        return cls(arr, int(arr.sum()))

    @classmethod
    def from_pixels(cls, pixels: np.ndarray) -> "Histogram":
        pixels = np.asarray(pixels, dtype=np.uint8).ravel()
        return cls.from_counts(np.bincount(pixels, minlength=256))

    def probabilities(self) -> np.ndarray:
        if self.total == 0:
            raise ValueError("empty histogram")
        return self.counts / float(self.total)


@dataclass(frozen=True)
class ThresholdResult:
    t: int
    sigma_w2: float
    w1: float
    w2: float
    sigma1_2: float
    sigma2_2: float


def _class_moments(counts: list[int]):
    """Prefix sums n, sum(i), sum(i^2) over intensities 0..t for every t."""
    n = s = q = 0
    out = []
    for i, c in enumerate(counts):
        n += c
        s += i * c
        q += i * i * c
        out.append((n, s, q))
    return out


def _result_at(counts: list[int], t: int) -> ThresholdResult:
    n1 = sum(counts[: t + 1])
    s1 = sum(i * c for i, c in enumerate(counts[: t + 1]))
    q1 = sum(i * i * c for i, c in enumerate(counts[: t + 1]))
    n = sum(counts)
    s = sum(i * c for i, c in enumerate(counts))
    q = sum(i * i * c for i, c in enumerate(counts))
    n2, s2, q2 = n - n1, s - s1, q - q1

    def var(nk, sk, qk):
        return Fraction(0) if nk == 0 else Fraction(qk, nk) - Fraction(sk, nk) ** 2

    w1, w2 = Fraction(n1, n), Fraction(n2, n)
    v1, v2 = var(n1, s1, q1), var(n2, s2, q2)
    return ThresholdResult(t, float(w1 * v1 + w2 * v2), float(w1), float(w2), float(v1), float(v2))


def otsu_threshold(h: Histogram) -> ThresholdResult:
    """Smallest ``t`` minimizing the weighted within-class variance.

    Class 1 holds intensities ``<= t``.  Only thresholds with a non-empty
    class 1 are candidates.  Comparisons are exact (integer arithmetic), so
    ties are resolved deterministically toward the smaller threshold.
    """
    if h.total <= 0:
        raise ValueError("empty histogram")
    counts = [int(c) for c in h.counts]
    n, s, _ = _class_moments(counts)[-1]
    best_t, best_num, best_den = -1, 0, 1
    # N*sigma_w^2 = Q - (S1^2/N1 + S2^2/N2); maximize the bracket as a fraction
    for t, (n1, s1, _q1) in enumerate(_class_moments(counts)):
        if n1 == 0:
            continue
        n2, s2 = n - n1, s - s1
        if n2 == 0:
            num, den = s1 * s1, n1
        else:
            num, den = s1 * s1 * n2 + s2 * s2 * n1, n1 * n2
        if best_t < 0 or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return _result_at(counts, best_t)


def otsu_threshold_between(h: Histogram) -> int:
    """Smallest ``t`` maximizing the between-class variance ``w1 w2 (mu1 - mu2)^2``."""
    if h.total <= 0:
        raise ValueError("empty histogram")
    counts = [int(c) for c in h.counts]
    n, s, _ = _class_moments(counts)[-1]
    best_t, best_num, best_den = -1, 0, 1
    for t, (n1, s1, _q1) in enumerate(_class_moments(counts)):
        if n1 == 0:
            continue
        n2, s2 = n - n1, s - s1
        if n2 == 0:
            num, den = 0, 1
        else:
            d = s1 * n2 - s2 * n1
            num, den = d * d, n1 * n2
        if best_t < 0 or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def otsu_image(gray: np.ndarray) -> ThresholdResult:
    return otsu_threshold(Histogram.from_pixels(grayscale(gray)))


def binarize(gray: np.ndarray, t: int) -> np.ndarray:
    """Intensities ``<= t`` become foreground (0), the rest background (255)."""
    gray = _check_raster(gray)
    if gray.ndim != 2:
        raise ValueError("binarize expects a single-channel raster")
    return np.where(gray <= t, FOREGROUND, BACKGROUND).astype(np.uint8)


def fixed_threshold(gray: np.ndarray, t: int = 128) -> np.ndarray:
    return binarize(gray, t)


def _box_sums(gray: np.ndarray, window: int) -> np.ndarray:
    half = window // 2
    padded = np.pad(gray.astype(np.int64), half, mode="edge")
    c = np.zeros((padded.shape[0] + 1, padded.shape[1] + 1), dtype=np.int64)
    c[1:, 1:] = padded.cumsum(0).cumsum(1)
    h, w = gray.shape
    return (c[window:window + h, window:window + w] - c[:h, window:window + w]
            - c[window:window + h, :w] + c[:h, :w])


def adaptive_threshold(gray: np.ndarray, window: int = 11, c: float = 5.0,
                       mode: str = "mean") -> np.ndarray:
    """Per-pixel threshold from the surrounding ``window x window`` patch.

    A pixel is foreground iff ``I <= local_mean - c``; the local mean is a box
    mean or a gaussian-weighted mean (sigma = window / 6).  Borders replicate
    edge pixels.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    gray = _check_raster(gray)
    if gray.ndim != 2:
        raise ValueError("adaptive_threshold expects a single-channel raster")
    area = window * window
    if mode == "mean":
        # integer comparison I*area <= S - c*area avoids rounding at the boundary
        fg = gray.astype(np.float64) * area <= _box_sums(gray, window) - c * area
    elif mode == "gaussian":
        sigma = window / 6.0
        local = ndimage.gaussian_filter(gray.astype(np.float64), sigma, mode="nearest",
                                        truncate=(window // 2) / sigma)
        fg = gray <= local - c
    else:
        raise ValueError(f"unknown adaptive mode {mode!r}")
    return np.where(fg, FOREGROUND, BACKGROUND).astype(np.uint8)


def window_union(shape: tuple[int, int], points: Iterable[tuple[int, int]],
                 window: int) -> np.ndarray:
    """Boolean mask of the union of ``window``-sized squares centred at (x, y) points."""
    h, w = shape
    half = window // 2
    cover = np.zeros((h, w), dtype=bool)
    for x, y in points:
        x, y = int(round(x)), int(round(y))
        cover[max(0, y - half):min(h, y + half + 1), max(0, x - half):min(w, x + half + 1)] = True
    return cover


def junction_window_otsu(gray: np.ndarray, points: Sequence[tuple[int, int]],
                         window: int = 31) -> ThresholdResult:
    """OTSU on the pooled histogram of windows around junction points.

    Overlapping windows count each pixel once.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd, got {window}")
    points = list(points)
    if not points:
        raise NoJunctionPointsError("no junction points given; use whole-image OTSU instead")
    gray = grayscale(gray)
    cover = window_union(gray.shape, points, window)
    if not cover.any():
        raise NoJunctionPointsError("junction windows fall outside the raster")
    return otsu_threshold(Histogram.from_pixels(gray[cover]))


def foreground(mask: np.ndarray) -> np.ndarray:
    return np.asarray(mask) == FOREGROUND
