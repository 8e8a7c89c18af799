"""Classical node detection on a binary mask.

Node outlines are closed curves, so filling holes turns every node into a
solid blob while connectors stay one or a few pixels wide.  A morphological
opening with a square kernel wider than any connector then strips the
connectors and leaves one blob per node.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from orgchart.imaging import foreground
from orgchart.model import BBox

SHAPES = ("rectangle", "square", "ellipse", "unknown")
_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class DetectedNode:
    id: int
    bbox: BBox
    shape: str = "unknown"
    fill_ratio: float = 0.0


def _is_rectangle(fg: np.ndarray, box: BBox) -> bool:
    sub = fg[box.y1:box.y2, box.x1:box.x2]
    ring = np.concatenate([sub[0, :], sub[-1, :], sub[1:-1, 0], sub[1:-1, -1]])
    corners = int(sub[0, 0]) + int(sub[0, -1]) + int(sub[-1, 0]) + int(sub[-1, -1])
    return ring.mean() >= 0.9 and corners == 4


def _is_ellipse(blob: np.ndarray, box: BBox, tol: float = 0.1) -> bool:
    sub = blob[box.y1:box.y2, box.x1:box.x2]
    edge = sub & ~ndimage.binary_erosion(sub, border_value=0)
    ys, xs = np.nonzero(edge)
    if len(xs) == 0:
        return False
    a, b = box.width / 2.0, box.height / 2.0
    cx, cy = (box.width - 1) / 2.0, (box.height - 1) / 2.0
    r = np.sqrt(((xs - cx) / a) ** 2 + ((ys - cy) / b) ** 2)
    return bool(np.mean(np.abs(r - 1.0) <= tol) >= 0.95)


def classify_shape(fg: np.ndarray, blob: np.ndarray, box: BBox) -> str:
    if _is_rectangle(fg, box):
        w, h = box.width, box.height
        return "square" if abs(w - h) <= 0.1 * max(w, h) else "rectangle"
    if _is_ellipse(blob, box):
        return "ellipse"
    return "unknown"


def detect_nodes(mask: np.ndarray, min_node_area: int = 300, max_fill_gap: int = 0,
                 open_size: int = 5) -> list[DetectedNode]:
    """Find node shapes in a binary mask (0 = ink).

    ``max_fill_gap`` closes outline breaks up to that many pixels before hole
    filling; ``open_size`` must exceed the connector stroke width.  Ids are
    assigned in reading order (top-to-bottom, then left-to-right).
    """
    fg = foreground(mask)
    closed = fg
    if max_fill_gap > 0:
        k = np.ones((max_fill_gap + 1, max_fill_gap + 1), dtype=bool)
        closed = ndimage.binary_closing(fg, structure=k) | fg
    filled = ndimage.binary_fill_holes(closed)
    holes = filled & ~closed
    solid = ndimage.binary_opening(filled, structure=np.ones((open_size, open_size), bool))
    labels, n = ndimage.label(solid, structure=_EIGHT)
    found = []
    for i, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        ys, xs = sl
        box = BBox(xs.start, ys.start, xs.stop, ys.stop)
        if box.area < min_node_area:
            continue
        blob = labels == i
        if not (holes[sl] & blob[sl]).any():
            continue  # solid ink, no enclosed interior
        long_side, short_side = max(box.width, box.height), min(box.width, box.height)
        if long_side > 8 * short_side and (holes[sl] & blob[sl]).sum() < short_side:
            continue
        fill = float(fg[sl].mean())
        found.append((box, classify_shape(fg, blob, box), fill))
    found.sort(key=lambda item: (item[0].y1, item[0].x1))
    return [DetectedNode(i, box, shape, fill) for i, (box, shape, fill) in enumerate(found, 1)]


def load_injected_nodes(path: str | Path) -> list[DetectedNode]:
    """Read externally detected boxes: a JSON list of ``[x1, y1, x2, y2]``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise ValueError("detector file must hold a JSON list of bboxes")
    boxes = []
    for item in data:
        coords = item["bbox"] if isinstance(item, dict) else item
        boxes.append(BBox.from_list(coords))
    boxes.sort(key=lambda b: (b.y1, b.x1))
    return [DetectedNode(i, b) for i, b in enumerate(boxes, 1)]
