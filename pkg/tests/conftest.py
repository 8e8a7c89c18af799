import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from orgchart.model import BBox
from orgchart.synthgen import GenSpec, generate, write_sample


def draw_rect(canvas: np.ndarray, box: BBox, ink: int = 0) -> np.ndarray:
    """1-px outline of ``box`` (half-open) drawn in place."""
    canvas[box.y1, box.x1:box.x2] = ink
    canvas[box.y2 - 1, box.x1:box.x2] = ink
    canvas[box.y1:box.y2, box.x1] = ink
    canvas[box.y1:box.y2, box.x2 - 1] = ink
    return canvas


def blank(h: int = 120, w: int = 160, value: int = 255) -> np.ndarray:
    return np.full((h, w), value, dtype=np.uint8)


@pytest.fixture
def chart_dir(tmp_path):
    """A clean 7-node chart with sidecar truth and ink map."""
    img, truth = generate(GenSpec(node_count=7, max_depth=3, seed=11))
    write_sample(tmp_path, "chart", img, truth)
    return tmp_path, img, truth
