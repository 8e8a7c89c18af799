"""Seeded synthetic org charts with exact ground truth.

A random tree is drawn, titles are assigned so that seniority strictly
decreases from the root down every path, nodes are laid out in rows
(top-down) or columns (left-rooted), and orthogonal trunk-and-branch
connectors are drawn.  The same spec and seed always give the same bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage

from orgchart.imaging import png_bytes
from orgchart._io import atomic_write_bytes, atomic_write_text
from orgchart.model import BBox, OrgGraph, OrgNode, graph_to_json
from orgchart.structure.root import SeniorityCorpus
from orgchart.synthgen.font import render_block, text_size

SHAPES = ("rectangle", "square", "ellipse")
LAYOUTS = ("top-down", "left-rooted")
NOISE_KINDS = ("none", "gaussian", "background_gradient")

INK, PAPER = 0, 255
MARGIN = 16
PAD = 6
SIBLING_GAP = 12
LEVEL_GAP = 44
MAX_TITLE_LEN = 15
MIN_JUNCTION_SPACING = 12

_INITIALS = "ABCDEFGHJKLMNPRSTW"
_SURNAMES = (
    "Adams", "Baker", "Chen", "Diaz", "Evans", "Ford", "Garcia", "Haas", "Ito", "Jones",
    "Khan", "Lopez", "Moore", "Nakai", "Ortiz", "Patel", "Quinn", "Reyes", "Smith", "Tran",
    "Ueda", "Vance", "Wong", "Young", "Zhou", "Olsen", "Kim", "Ruiz", "Park", "Sato",
)
_ACRONYMS = {"ceo", "cfo", "cto", "cio", "cmo", "coo", "vp", "evp", "svp"}


class LayoutError(ValueError):
    """The chart does not fit the canvas."""


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"
    sigma: float = 0.0
    lo: int = 80
    hi: int = 180
    ink_threshold: int = 128

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}")
        if self.sigma < 0:
            raise ValueError("noise sigma must be >= 0")
        if not (0 <= self.lo <= 255 and 0 <= self.hi <= 255):
            raise ValueError("gradient bounds must lie in [0, 255]")

    @classmethod
    def gaussian(cls, sigma: float) -> "NoiseSpec":
        return cls("gaussian", sigma=sigma)

    @classmethod
    def gradient(cls, lo: int = 80, hi: int = 180) -> "NoiseSpec":
        return cls("background_gradient", lo=lo, hi=hi)


@dataclass(frozen=True)
class GenSpec:
    node_count: int = 10
    max_depth: int = 4
    max_children: int = 4
    shapes: tuple[str, ...] = SHAPES
    width: int = 1024
    height: int = 768
    stroke_width: int = 1
    layout: str = "top-down"
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    max_attempts: int = 40

    def __post_init__(self):
        object.__setattr__(self, "shapes", tuple(self.shapes))
        if not 1 <= self.node_count <= 50:
            raise ValueError("node_count must be in 1..50")
        if self.max_depth < 0 or self.max_children < 1:
            raise ValueError("max_depth must be >= 0 and max_children >= 1")
        capacity = sum(self.max_children ** d for d in range(self.max_depth + 1))
        if capacity < self.node_count:
            raise ValueError(f"a tree with depth <= {self.max_depth} and <= {self.max_children} "
                             f"children holds at most {capacity} nodes")
        if not self.shapes or any(s not in SHAPES for s in self.shapes):
            raise ValueError(f"shapes must be a non-empty subset of {SHAPES}")
        if self.layout not in LAYOUTS:
            raise ValueError(f"layout must be one of {LAYOUTS}")
        if not 1 <= self.stroke_width <= 4:
            raise ValueError("stroke_width must be in 1..4")
        if self.width < 64 or self.height < 64:
            raise ValueError("canvas must be at least 64x64")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Junction:
    x: int
    y: int
    kind: str

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "kind": self.kind}


@dataclass(frozen=True)
class GroundTruth:
    graph: OrgGraph
    junctions: tuple[Junction, ...]
    ink: np.ndarray = field(repr=False, compare=False)
    shapes: dict = field(default_factory=dict, compare=False)
    drops: dict = field(default_factory=dict, compare=False, repr=False)
    layout: str = "top-down"

    @property
    def ink_pixels(self) -> int:
        return int(self.ink.sum())

    def to_json(self) -> str:
        return graph_to_json(self.graph, {
            "junctions": [j.to_dict() for j in self.junctions],
            "ink_pixels": self.ink_pixels,
        })


# -- tree, titles, names ------------------------------------------------------

def _random_tree(rng: np.random.Generator, spec: GenSpec) -> list[int | None]:
    parents: list[int | None] = [None]
    depth = [0]
    kids = [0]
    for i in range(1, spec.node_count):
        eligible = [j for j in range(i) if depth[j] < spec.max_depth
                    and kids[j] < spec.max_children]
        # favour deeper parents: uniform attachment makes charts too wide
        weight = np.array([depth[j] + 1.0 for j in eligible])
        j = int(eligible[rng.choice(len(eligible), p=weight / weight.sum())])
        parents.append(j)
        depth.append(depth[j] + 1)
        kids.append(0)
        kids[j] += 1
    return parents


def _display_title(title: str) -> str:
    return " ".join(w.upper() if w in _ACRONYMS else w.capitalize() for w in title.split())


def _name_pool(corpus: SeniorityCorpus) -> list[str]:
    """Person names that match nothing in the corpus."""
    pool = [f"{i}. {s}" for s in _SURNAMES for i in _INITIALS]
    return [p for p in pool if corpus.score(p) == 0.0]


def _names(rng: np.random.Generator, n: int, pool: list[str]) -> list[str]:
    picks = rng.choice(len(pool), size=n, replace=False)
    return [pool[int(k)] for k in picks]


def _assign_titles(rng, parents, names, corpus: SeniorityCorpus) -> list[str]:
    n = len(parents)
    children = [[] for _ in range(n)]
    for c, p in enumerate(parents):
        if p is not None:
            children[p].append(c)
    height = [0] * n
    for v in reversed(range(n)):  # parents precede children
        height[v] = max((height[c] + 1 for c in children[v]), default=0)

    by_score: dict[float, list[str]] = {}
    for title in sorted(corpus.entries):
        if len(title) <= MAX_TITLE_LEN:
            by_score.setdefault(corpus.entries[title], []).append(title)
    tiers = sorted(by_score, reverse=True)
    if len(tiers) <= height[0]:
        raise LayoutError(f"corpus has {len(tiers)} seniority tiers, chart needs {height[0] + 1}")

    tier_of: list[int] = [0] * n
    texts: list[str] = [""] * n
    for v in range(n):
        last_ok = len(tiers) - 1 - height[v]
        if parents[v] is None:
            lo, hi = 0, min(2, last_ok)
        else:
            lo = tier_of[parents[v]] + 1
            hi = min(lo + 3, last_ok)
        q = int(rng.integers(lo, hi + 1))
        options = by_score[tiers[q]]
        title = options[int(rng.integers(len(options)))]
        tier_of[v] = q
        texts[v] = f"{names[v]}\n{_display_title(title)}"
        if corpus.score(texts[v]) != tiers[q]:
            raise LayoutError(f"name {names[v]!r} collides with the seniority corpus")
    return texts


# -- geometry -------------------------------------------------------------------

def _odd(v: int) -> int:
    return v if v % 2 else v + 1


def _node_size(lines: list[str], shape: str, stroke: int) -> tuple[int, int]:
    tw, th = text_size(lines)
    extra = 2 * (stroke - 1)
    if shape == "ellipse":
        # the ellipse through the text block's corners with (x/a)^2 = 0.8 there
        return (_odd(int(math.ceil(tw / math.sqrt(0.8))) + 2 * PAD + extra),
                _odd(int(math.ceil(th / math.sqrt(0.2))) + 2 * PAD + extra))
    w, h = _odd(tw + 2 * PAD + extra), _odd(th + 2 * PAD + extra)
    if shape == "square":
        w = h = max(w, h)
    return w, h


def _layout(parents, sizes, spec: GenSpec):
    """Return per-node BBox list plus connector geometry, or raise LayoutError."""
    n = len(parents)
    children = [[] for _ in range(n)]
    level = [0] * n
    for c, p in enumerate(parents):
        if p is not None:
            children[p].append(c)
            level[c] = level[p] + 1
    depth = max(level)
    horizontal = spec.layout == "top-down"
    # "along" runs across siblings, "across" runs from level to level
    along = [sizes[v][0] if horizontal else sizes[v][1] for v in range(n)]
    across = [sizes[v][1] if horizontal else sizes[v][0] for v in range(n)]
    gap = SIBLING_GAP if horizontal else max(6, SIBLING_GAP // 2)

    # each subtree keeps a per-depth profile of (lo, hi) extents relative to
    # its root's centre; siblings are packed so no two profiles overlap at any
    # depth and the parent sits midway over its first and last child
    prof: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    rel = [0] * n
    for v in reversed(range(n)):  # children always have larger indices
        own_lo = -((along[v] - 1) // 2)
        kids = children[v]
        if not kids:
            prof[v] = [(own_lo, own_lo + along[v])]
            continue
        merged = list(prof[kids[0]])
        pos = [0]
        for c in kids[1:]:
            shift = max(merged[d][1] + gap - prof[c][d][0]
                        for d in range(min(len(merged), len(prof[c]))))
            pos.append(shift)
            for d, (clo, chi) in enumerate(prof[c]):
                if d < len(merged):
                    merged[d] = (min(merged[d][0], clo + shift), max(merged[d][1], chi + shift))
                else:
                    merged.append((clo + shift, chi + shift))
        mid = (pos[0] + pos[-1]) // 2
        # a trunk a few pixels beside a drop would merge two junctions
        nearest = min(pos, key=lambda q: abs(q - mid))
        if 0 < abs(nearest - mid) < MIN_JUNCTION_SPACING:
            mid = nearest
        for c, pc in zip(kids, pos):
            rel[c] = pc - mid
        prof[v] = [(own_lo, own_lo + along[v])] + [(lo - mid, hi - mid) for lo, hi in merged]
    lo0 = min(lo for lo, _ in prof[0])
    hi0 = max(hi for _, hi in prof[0])
    along_limit = spec.width if horizontal else spec.height
    across_limit = spec.height if horizontal else spec.width
    total = hi0 - lo0
    if total + 2 * MARGIN > along_limit:
        raise LayoutError(f"{'width' if horizontal else 'height'} overflow: chart needs "
                          f"{total + 2 * MARGIN} px, canvas has {along_limit}")

    thick = [max(across[v] for v in range(n) if level[v] == lv) for lv in range(depth + 1)]
    start = [MARGIN]
    for lv in range(depth):
        start.append(start[-1] + thick[lv] + LEVEL_GAP)
    needed = start[-1] + thick[-1] + MARGIN
    if needed > across_limit:
        raise LayoutError(f"{'height' if horizontal else 'width'} overflow: chart needs "
                          f"{needed} px, canvas has {across_limit}")

    centre = [0] * n
    centre[0] = (along_limit - total) // 2 - lo0
    for v in range(1, n):
        centre[v] = centre[parents[v]] + rel[v]
    boxes = []
    for v in range(n):
        a1 = centre[v] - (along[v] - 1) // 2
        c1 = start[level[v]]
        if horizontal:
            boxes.append(BBox(a1, c1, a1 + along[v], c1 + across[v]))
        else:
            boxes.append(BBox(c1, a1, c1 + across[v], a1 + along[v]))
    bar_pos = [start[lv] + thick[lv] + LEVEL_GAP // 2 for lv in range(depth + 1)]
    return boxes, children, level, centre, bar_pos


def _ellipse_mask(w: int, h: int) -> np.ndarray:
    # half a pixel beyond the box keeps the tips at least 5 px thick, so they
    # survive the opening that strips connectors during detection
    a, b = (w + 1) / 2.0, (h + 1) / 2.0
    yy, xx = np.mgrid[0:h, 0:w]
    return ((xx - (w - 1) / 2.0) / a) ** 2 + ((yy - (h - 1) / 2.0) / b) ** 2 <= 1.0


def _draw_outline(ink: np.ndarray, box: BBox, shape: str, stroke: int) -> None:
    sub = ink[box.y1:box.y2, box.x1:box.x2]
    if shape == "ellipse":
        filled = _ellipse_mask(box.width, box.height)
        inner = ndimage.binary_erosion(filled, iterations=stroke, border_value=0)
        sub |= filled & ~inner
    else:
        sub[:stroke, :] = True
        sub[-stroke:, :] = True
        sub[:, :stroke] = True
        sub[:, -stroke:] = True


def _hline(ink, y, xa, xb, stroke):
    lo = (stroke - 1) // 2
    ink[y - lo:y - lo + stroke, min(xa, xb):max(xa, xb) + 1] = True


def _vline(ink, x, ya, yb, stroke):
    lo = (stroke - 1) // 2
    ink[min(ya, yb):max(ya, yb) + 1, x - lo:x - lo + stroke] = True


def _connectors(ink, boxes, children, level, centre, bar_pos, spec: GenSpec):
    """Draw trunk-and-branch connectors; return junctions and per-child drop boxes."""
    horizontal = spec.layout == "top-down"
    s = spec.stroke_width
    junctions: list[Junction] = []
    drops: dict[int, BBox] = {}

    def line_across(along_pos, a, b):  # runs from level to level
        (_vline if horizontal else _hline)(ink, along_pos, a, b, s)

    def line_along(across_pos, a, b):  # runs across siblings
        (_hline if horizontal else _vline)(ink, across_pos, a, b, s)

    def point(along_pos, across_pos):
        return (along_pos, across_pos) if horizontal else (across_pos, along_pos)

    for p, kids in enumerate(children):
        if not kids:
            continue
        pb = boxes[p]
        p_end = pb.y2 if horizontal else pb.x2
        bar = bar_pos[level[p]]
        pc = centre[p]
        line_across(pc, p_end, bar)
        xs = sorted({pc, *(centre[c] for c in kids)})
        if len(xs) > 1:
            line_along(bar, xs[0], xs[-1])
        kid_pos = {centre[c] for c in kids}
        for c in kids:
            cb = boxes[c]
            c_start = cb.y1 if horizontal else cb.x1
            line_across(centre[c], bar, c_start - 1)
            lo = (s - 1) // 2
            a0, a1 = centre[c] - lo, centre[c] - lo + s
            b0, b1 = bar + s, c_start
            if len(xs) == 1:
                b0 = p_end
            drops[c] = (BBox(a0, b0, a1, b1) if horizontal else BBox(b0, a0, b1, a1))
        if len(xs) == 1:
            continue
        for x in xs:
            up, down = x == pc, x in kid_pos
            left, right = x > xs[0], x < xs[-1]
            arms = up + down + left + right
            if arms == 4:
                kind = "cross"
            elif arms == 3:
                kind = "t"
            elif arms == 2 and (up or down) and (left or right):
                kind = "l"
            else:
                continue
            jx, jy = point(x, bar)
            junctions.append(Junction(int(jx), int(jy), kind))
    return junctions, drops


# -- public API -------------------------------------------------------------------

def perturb(img: np.ndarray, noise: NoiseSpec, seed: int = 0) -> np.ndarray:
    """Apply gaussian noise or a horizontal background gradient."""
    img = np.asarray(img, dtype=np.uint8)
    if noise.sigma < 0:
        raise ValueError("noise sigma must be >= 0")
    if noise.kind == "none" or (noise.kind == "gaussian" and noise.sigma == 0):
        return img.copy()
    if noise.kind == "gaussian":
        rng = np.random.default_rng(seed)
        noisy = img.astype(np.float64) + rng.normal(0.0, noise.sigma, img.shape)
        return np.clip(np.floor(noisy + 0.5), 0, 255).astype(np.uint8)
    w = img.shape[1]
    ramp = noise.lo + (noise.hi - noise.lo) * np.arange(w, dtype=np.float64) / max(1, w - 1)
    ramp = np.floor(ramp + 0.5).astype(np.uint8)
    out = img.copy()
    background = img > noise.ink_threshold
    out[background] = np.broadcast_to(ramp, img.shape[:2])[background]
    return out


def _attempt(rng, spec: GenSpec, corpus: SeniorityCorpus, pool: list[str]):
    parents = _random_tree(rng, spec)
    names = _names(rng, spec.node_count, pool)
    texts = _assign_titles(rng, parents, names, corpus)
    shapes = [spec.shapes[int(rng.integers(len(spec.shapes)))] for _ in parents]
    sizes = [_node_size(t.split("\n"), shapes[v], spec.stroke_width) for v, t in enumerate(texts)]
    boxes, children, level, centre, bar_pos = _layout(parents, sizes, spec)

    ink = np.zeros((spec.height, spec.width), dtype=bool)
    for v, box in enumerate(boxes):
        _draw_outline(ink, box, shapes[v], spec.stroke_width)
    junctions, drops = _connectors(ink, boxes, children, level, centre, bar_pos, spec)
    for v, box in enumerate(boxes):
        cx, cy = box.center
        render_block(ink, texts[v].split("\n"), int(cx), int(cy), ink=True)
    return parents, texts, shapes, boxes, level, ink, junctions, drops


def generate(spec: GenSpec, corpus: SeniorityCorpus | None = None
             ) -> tuple[np.ndarray, GroundTruth]:
    """Draw one chart.  Retries other random trees before reporting overflow."""
    corpus = corpus or SeniorityCorpus.default()
    rng = np.random.default_rng(spec.seed)
    pool = _name_pool(corpus)
    last: LayoutError | None = None
    for _ in range(spec.max_attempts):
        try:
            parents, texts, shapes, boxes, level, ink, junctions, drops = \
                _attempt(rng, spec, corpus, pool)
            break
        except LayoutError as exc:
            last = exc
    else:
        raise LayoutError(f"no layout fits after {spec.max_attempts} attempts; last: {last}")

    order = sorted(range(len(boxes)), key=lambda v: (boxes[v].y1, boxes[v].x1))
    ids = {v: i for i, v in enumerate(order, 1)}
    nodes = [
        OrgNode(ids[v], boxes[v], texts[v].replace("\n", " "), level[v],
                None if parents[v] is None else ids[parents[v]])
        for v in range(len(boxes))
    ]
    graph = OrgGraph.from_nodes(nodes, ids[0])
    truth = GroundTruth(
        graph=graph,
        junctions=tuple(sorted(junctions, key=lambda j: (j.y, j.x))),
        ink=ink,
        shapes={ids[v]: shapes[v] for v in range(len(boxes))},
        drops={ids[c]: box for c, box in drops.items()},
        layout=spec.layout,
    )
    img = np.where(ink, INK, PAPER).astype(np.uint8)
    img = perturb(img, spec.noise, seed=spec.seed ^ 0x5EED)
    return img, truth


def break_connector(img: np.ndarray, truth: GroundTruth, child_id: int) -> np.ndarray:
    """Erase the middle third of the connector piece that leads into ``child_id``."""
    box = truth.drops[child_id]
    out = img.copy()
    if truth.layout == "top-down":
        third = max(1, box.height // 3)
        out[box.y1 + third:box.y2 - third, box.x1:box.x2] = PAPER
    else:
        third = max(1, box.width // 3)
        out[box.y1:box.y2, box.x1 + third:box.x2 - third] = PAPER
    return out


def write_sample(out_dir: str | Path, name: str, img: np.ndarray, truth: GroundTruth,
                 ink_map: bool = True) -> Path:
    """Write ``<name>.png``, ``<name>.truth.json`` and optionally ``<name>.ink.png``."""
    out_dir = Path(out_dir)
    png = out_dir / f"{name}.png"
    atomic_write_bytes(png, png_bytes(img))
    atomic_write_text(out_dir / f"{name}.truth.json", truth.to_json())
    if ink_map:
        atomic_write_bytes(out_dir / f"{name}.ink.png",
                           png_bytes(np.where(truth.ink, INK, PAPER).astype(np.uint8)))
    return png


def sample_specs(count: int, seed: int = 0, node_range: Sequence[int] = (3, 25),
                 max_depth: int = 5, **overrides) -> list[GenSpec]:
    """A reproducible batch of varied specs (node counts, layouts, shapes)."""
    rng = np.random.default_rng(seed)
    specs = []
    for i in range(count):
        n = int(rng.integers(node_range[0], node_range[1] + 1))
        layout = LAYOUTS[int(rng.integers(2))] if "layout" not in overrides else None
        kw = dict(node_count=n, max_depth=max_depth, max_children=4,
                  layout=layout, seed=int(rng.integers(2 ** 63)))
        kw.update(overrides)
        specs.append(GenSpec(**kw))
    return specs
