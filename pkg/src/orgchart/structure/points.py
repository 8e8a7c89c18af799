"""Split detected corners into node points, junction points and noise.

A node point sits on a node's border where a connector leaves it.  A
junction point is where connector lines meet; it is kept only if the local
ink pattern is a cross, T or L (counted as arms leaving a square window).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from orgchart.features import CornerPoint
from orgchart.imaging import foreground
from orgchart.structure.nodes import DetectedNode

NODE_POINT = "node_point"
JUNCTION_POINT = "junction_point"
INVALID = "invalid"

PERIMETER_TOL = 2.0
L_ANGLE_BAND = (60.0, 120.0)


@dataclass(frozen=True)
class ClassifiedPoint:
    x: int
    y: int
    kind: str = INVALID
    junction_kind: str = "none"
    owner_node: int | None = None


def node_occupancy(shape: tuple[int, int], nodes: Iterable[DetectedNode]) -> np.ndarray:
    inside = np.zeros(shape, dtype=bool)
    for n in nodes:
        b = n.bbox
        inside[b.y1:b.y2, b.x1:b.x2] = True
    return inside


def classify_points(corners: Sequence[CornerPoint], nodes: Sequence[DetectedNode],
                    mask: np.ndarray, window: int = 15,
                    contact_radius: int = 3) -> list[ClassifiedPoint]:
    """Classify corners against the detected nodes, then filter junction candidates.

    Corners within 2 px of a node border become node points when connector
    ink leaves the node nearby, otherwise they are outline corners (invalid).
    Corners deeper inside a node are text and also invalid.  Everything else
    goes through :func:`filter_junctions`.
    """
    fg = foreground(mask)
    h, w = fg.shape
    edge_ink = fg & ~node_occupancy(fg.shape, nodes)
    out: list[ClassifiedPoint] = []
    candidates: list[ClassifiedPoint] = []
    for c in corners:
        near = []
        inside_deep = False
        for n in nodes:
            d = n.bbox.perimeter_distance(c.x, c.y)
            if n.bbox.contains(c.x, c.y) and d > PERIMETER_TOL:
                inside_deep = True
            elif d <= PERIMETER_TOL:
                near.append((d, n.bbox.area, n.id))
        if near:
            _, _, owner = min(near)
            y0, y1 = max(0, c.y - contact_radius), min(h, c.y + contact_radius + 1)
            x0, x1 = max(0, c.x - contact_radius), min(w, c.x + contact_radius + 1)
            if edge_ink[y0:y1, x0:x1].any():
                out.append(ClassifiedPoint(c.x, c.y, NODE_POINT, "none", owner))
            else:
                out.append(ClassifiedPoint(c.x, c.y, INVALID))
        elif inside_deep:
            out.append(ClassifiedPoint(c.x, c.y, INVALID))
        else:
            candidates.append(ClassifiedPoint(c.x, c.y))
    return out + filter_junctions(candidates, mask, window)


def _border_ring(h: int, w: int) -> list[tuple[int, int]]:
    """Window border pixels (row, col) in clockwise order starting top-left."""
    ring = [(0, c) for c in range(w)]
    ring += [(r, w - 1) for r in range(1, h)]
    if h > 1:
        ring += [(h - 1, c) for c in range(w - 2, -1, -1)]
    if w > 1:
        ring += [(r, 0) for r in range(h - 2, 0, -1)]
    return ring


def _snap(fg: np.ndarray, x: int, y: int, radius: int) -> tuple[int, int] | None:
    h, w = fg.shape
    best = None
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            yy, xx = y + dy, x + dx
            if 0 <= yy < h and 0 <= xx < w and fg[yy, xx]:
                key = (dx * dx + dy * dy, yy, xx)
                if key[0] <= radius * radius and (best is None or key < best):
                    best = key
    return None if best is None else (best[2], best[1])


def count_arms(fg: np.ndarray, x: int, y: int, window: int):
    """Arms leaving a window centred on an ink pixel, as unit direction vectors."""
    h, w = fg.shape
    half = window // 2
    y0, y1 = max(0, y - half), min(h, y + half + 1)
    x0, x1 = max(0, x - half), min(w, x + half + 1)
    sub = fg[y0:y1, x0:x1]
    labels, _ = ndimage.label(sub, structure=np.ones((3, 3), bool))
    own = labels[y - y0, x - x0]
    ring = _border_ring(*sub.shape)
    member = [labels[r, c] == own for r, c in ring]
    if all(member) or not any(member):
        return []
    # rotate so the sequence starts just after a gap, then collect runs
    start = next(i for i in range(len(ring)) if not member[i - 1] and member[i])
    runs, cur = [], []
    for k in range(len(ring)):
        i = (start + k) % len(ring)
        if member[i]:
            cur.append(ring[i])
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    arms = []
    for run in runs:
        ry = np.mean([r for r, _ in run]) + y0 - y
        rx = np.mean([c for _, c in run]) + x0 - x
        norm = math.hypot(rx, ry)
        arms.append((rx / norm, ry / norm) if norm else (0.0, 0.0))
    return arms


def junction_kind(arms) -> str:
    if len(arms) == 4:
        return "cross"
    if len(arms) == 3:
        return "t"
    if len(arms) == 2:
        (ax, ay), (bx, by) = arms
        cosang = max(-1.0, min(1.0, ax * bx + ay * by))
        angle = math.degrees(math.acos(cosang))
        if L_ANGLE_BAND[0] <= angle <= L_ANGLE_BAND[1]:
            return "l"
    return "none"


def filter_junctions(candidates: Sequence[ClassifiedPoint], mask: np.ndarray,
                     window: int = 15, snap_radius: int = 3) -> list[ClassifiedPoint]:
    """Keep candidates whose neighbourhood looks like a cross, T or L junction.

    The candidate is first snapped to the nearest ink pixel (corner peaks sit
    a pixel or two off thin lines).  Arms are maximal runs of border pixels
    of the window that connect to the centre through ink; 4 arms make a
    cross, 3 a T, 2 perpendicular-ish arms an L.  Anything else is invalid.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError("junction window must be odd and >= 3")
    fg = foreground(mask)
    out = []
    for p in candidates:
        snapped = _snap(fg, p.x, p.y, snap_radius)
        if snapped is None:
            out.append(replace(p, kind=INVALID, junction_kind="none", owner_node=None))
            continue
        kind = junction_kind(count_arms(fg, snapped[0], snapped[1], window))
        if kind == "none":
            out.append(replace(p, kind=INVALID, junction_kind="none", owner_node=None))
        else:
            out.append(ClassifiedPoint(p.x, p.y, JUNCTION_POINT, kind, None))
    return out
