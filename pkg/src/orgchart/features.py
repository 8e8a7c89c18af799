"""Corner detection: Harris and Shi-Tomasi responses, good-features selection,
and bounding-box corner refinement.

Gradients come from 3x3 Sobel kernels and the second-moment matrix is
accumulated under a normalized gaussian window (5x5, sigma 1 by default).
Eigenvalues are taken in closed form from the 2x2 tensor.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from orgchart.imaging import grayscale, otsu_image
from orgchart.model import BBox

DETECTORS = ("harris", "shi_tomasi")

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = _SOBEL_X.T


class RefinementWarning(UserWarning):
    """Corner refinement kept (part of) the original bounding box."""


@dataclass(frozen=True)
class CornerParams:
    k: float = 0.04
    quality: float = 0.01
    min_distance: float = 7.0
    window: int = 5
    sigma: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.quality < 1.0:
            raise ValueError("quality must be in (0, 1)")
        if self.min_distance < 1:
            raise ValueError("min_distance must be >= 1")
        if not 0.0 < self.k < 0.25:
            raise ValueError("k must be in (0, 0.25)")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")

    @property
    def margin(self) -> int:
        # half window plus the Sobel apron
        return self.window // 2 + 1


@dataclass(frozen=True)
class StructureTensor:
    lambda1: float
    lambda2: float
    window: int
    sigma: float


@dataclass(frozen=True)
class CornerPoint:
    x: int
    y: int
    response: float


def gaussian_window(window: int, sigma: float) -> np.ndarray:
    half = window // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


def _eigen(a, b, c):
    """Eigenvalues of [[a, b], [b, c]] via trace and determinant (lambda1 >= lambda2)."""
    half_tr = (a + c) / 2.0
    disc = np.sqrt(((a - c) / 2.0) ** 2 + b * b)
    return half_tr + disc, half_tr - disc


def tensor_maps(gray: np.ndarray, params: CornerParams = CornerParams()):
    """Windowed Ix^2, IxIy, Iy^2 maps for the whole image."""
    g = grayscale(gray).astype(np.float64)
    ix = ndimage.correlate(g, _SOBEL_X, mode="nearest")
    iy = ndimage.correlate(g, _SOBEL_Y, mode="nearest")
    kern = gaussian_window(params.window, params.sigma)
    sxx = ndimage.correlate(ix * ix, kern, mode="constant")
    sxy = ndimage.correlate(ix * iy, kern, mode="constant")
    syy = ndimage.correlate(iy * iy, kern, mode="constant")
    return sxx, sxy, syy


def structure_tensor(gray: np.ndarray, x: int, y: int,
                     params: CornerParams = CornerParams()) -> StructureTensor:
    """Second-moment eigenvalues at one pixel, computed from the local patch only."""
    g = grayscale(gray).astype(np.float64)
    h, w = g.shape
    m = params.margin
    if not (m <= x < w - m and m <= y < h - m):
        raise ValueError(f"({x}, {y}) is within {m} px of the border")
    half = params.window // 2
    patch = g[y - half - 1:y + half + 2, x - half - 1:x + half + 2]
    ix = (patch[1:-1, 2:] - patch[1:-1, :-2]) * 2 + (patch[:-2, 2:] - patch[:-2, :-2]) \
        + (patch[2:, 2:] - patch[2:, :-2])
    iy = (patch[2:, 1:-1] - patch[:-2, 1:-1]) * 2 + (patch[2:, :-2] - patch[:-2, :-2]) \
        + (patch[2:, 2:] - patch[:-2, 2:])
    kern = gaussian_window(params.window, params.sigma)
    a = float((kern * ix * ix).sum())
    b = float((kern * ix * iy).sum())
    c = float((kern * iy * iy).sum())
    l1, l2 = _eigen(a, b, c)
    return StructureTensor(float(l1), float(l2), params.window, params.sigma)


def harris_response(t: StructureTensor, k: float = 0.04) -> float:
    return t.lambda1 * t.lambda2 - k * (t.lambda1 + t.lambda2) ** 2


def shi_tomasi_response(t: StructureTensor) -> float:
    return min(t.lambda1, t.lambda2)


def response_map(gray: np.ndarray, params: CornerParams = CornerParams(),
                 detector: str = "shi_tomasi") -> np.ndarray:
    """Corner response at every pixel; border pixels are set to 0."""
    if detector not in DETECTORS:
        raise ValueError(f"unknown detector {detector!r}")
    sxx, sxy, syy = tensor_maps(gray, params)
    l1, l2 = _eigen(sxx, sxy, syy)
    if detector == "harris":
        resp = l1 * l2 - params.k * (l1 + l2) ** 2
    else:
        resp = np.minimum(l1, l2)
    m = params.margin
    out = np.zeros_like(resp)
    out[m:-m, m:-m] = resp[m:-m, m:-m]
    return out


TIE_DIGITS = 9  # responses equal to this many digits (relative to the max) tie


def _suppress(ys, xs, vals, min_distance: float, shade=None) -> list[CornerPoint]:
    """Greedy minimum-distance suppression.

    Candidates are visited by response; near-equal responses (a thick outline
    has equally strong outer and inner corners) go to the darker pixel first,
    so the outer vertex, which sits on ink, survives.  The accepted points are
    returned ordered by (response desc, y, x).
    """
    top = float(vals.max()) if len(vals) else 1.0
    level = np.round(vals / top, TIE_DIGITS)
    keys = (xs, ys) if shade is None else (xs, ys, shade)
    order = np.lexsort((*keys, -level))
    cell = max(1.0, float(min_distance))
    grid: dict[tuple[int, int], list[tuple[int, int]]] = {}
    d2 = min_distance * min_distance
    reach = int(math.ceil(min_distance / cell))
    accepted: list[CornerPoint] = []
    for i in order:
        x, y = int(xs[i]), int(ys[i])
        gx, gy = int(x // cell), int(y // cell)
        clash = False
        for dy in range(-reach, reach + 1):
            for dx in range(-reach, reach + 1):
                for ax, ay in grid.get((gx + dx, gy + dy), ()):
                    if (ax - x) ** 2 + (ay - y) ** 2 < d2:
                        clash = True
                        break
                if clash:
                    break
            if clash:
                break
        if not clash:
            grid.setdefault((gx, gy), []).append((x, y))
            accepted.append(CornerPoint(x, y, float(vals[i])))
    accepted.sort(key=lambda p: (-p.response, p.y, p.x))
    return accepted


def good_features(gray: np.ndarray, params: CornerParams = CornerParams(),
                  detector: str = "shi_tomasi", response: np.ndarray | None = None
                  ) -> list[CornerPoint]:
    """Strong, well-separated corners ordered by response (desc), then y, then x.

    Candidates are 3x3 local maxima whose response exceeds
    ``quality * max_response``; a candidate closer than ``min_distance`` to an
    already accepted corner is dropped.  Among equally strong candidates the
    darker pixel is tried first.
    """
    resp = response_map(gray, params, detector) if response is None else response
    top = float(resp.max(initial=0.0))
    if top <= 0.0:
        return []
    peaks = (resp == ndimage.maximum_filter(resp, size=3, mode="constant")) \
        & (resp > params.quality * top)
    ys, xs = np.nonzero(peaks)
    return _suppress(ys, xs, resp[ys, xs], params.min_distance, grayscale(gray)[ys, xs])


EDGE_SNAP = 4  # widest stroke the walk crosses
_SNAP_BAND = 2


def _edge_snap(dark: np.ndarray, px: int, py: int, sx: int, sy: int, x0: int, y0: int):
    """Step (px, py) outward along (sx, sy) while the next column/row has ink near it."""
    h, w = dark.shape
    rows = slice(max(0, py - _SNAP_BAND), py + _SNAP_BAND + 1)
    cols = slice(max(0, px - _SNAP_BAND), px + _SNAP_BAND + 1)
    x, y = px, py
    for _ in range(EDGE_SNAP):
        if 0 <= x + sx < w and dark[rows, x + sx].any():
            x += sx
        else:
            break
    for _ in range(EDGE_SNAP):
        if 0 <= y + sy < h and dark[y + sy, cols].any():
            y += sy
        else:
            break
    return x + x0, y + y0


def refine_bbox_corners(gray: np.ndarray, bbox: BBox, roi_radius: int = 5,
                        params: CornerParams = CornerParams(),
                        detector: str = "shi_tomasi",
                        response: np.ndarray | None = None) -> BBox:
    """Snap the upper-left and bottom-right corners of ``bbox`` to nearby corners.

    Each corner pixel is searched in a ``(2 r + 1)^2`` ROI for the strongest
    response; corners with nothing above ``quality * max_response`` stay put.
    On thin outlines the response peaks one pixel inside the drawn corner, so
    the winner is then pushed outward (at most ``EDGE_SNAP`` px) while the
    next column or row still holds ink.
    Emits :class:`RefinementWarning` when a corner is left unchanged or the
    refined box would be degenerate.
    """
    if roi_radius < 2:
        raise ValueError("roi_radius must be >= 2")
    g = grayscale(gray)
    h, w = g.shape
    if not bbox.within(w, h):
        raise ValueError(f"bbox {bbox.as_list()} outside raster {w}x{h}")
    resp = response_map(g, params, detector) if response is None else response
    floor = params.quality * float(resp.max(initial=0.0))

    def snap(cx: int, cy: int, sx: int, sy: int):
        y0, y1 = max(0, cy - roi_radius), min(h, cy + roi_radius + 1)
        x0, x1 = max(0, cx - roi_radius), min(w, cx + roi_radius + 1)
        roi = resp[y0:y1, x0:x1]
        if roi.size == 0 or floor <= 0.0 or roi.max() <= floor:
            return None
        # strongest response, ties toward the nominal corner then by (y, x)
        best = roi.max()
        yy, xx = np.nonzero(roi == best)
        dist = (yy + y0 - cy) ** 2 + (xx + x0 - cx) ** 2
        i = int(np.lexsort((xx, yy, dist))[0])
        px, py = int(xx[i] + x0), int(yy[i] + y0)
        dark = g[y0:y1, x0:x1] <= otsu_image(g[y0:y1, x0:x1]).t
        if dark.all() or not dark.any():
            return px, py
        return _edge_snap(dark, px - x0, py - y0, sx, sy, x0, y0)

    ul = snap(bbox.x1, bbox.y1, -1, -1)
    br = snap(bbox.x2 - 1, bbox.y2 - 1, 1, 1)
    x1, y1 = ul if ul else (bbox.x1, bbox.y1)
    x2, y2 = (br[0] + 1, br[1] + 1) if br else (bbox.x2, bbox.y2)
    if ul is None or br is None:
        warnings.warn(f"no corner found near bbox {bbox.as_list()}; corner kept",
                      RefinementWarning, stacklevel=2)
    if x1 >= x2 or y1 >= y2:
        warnings.warn(f"refined bbox degenerate for {bbox.as_list()}; original kept",
                      RefinementWarning, stacklevel=2)
        return bbox
    return BBox(x1, y1, x2, y2)
