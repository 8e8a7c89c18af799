"""Built-in 5x7 bitmap font (upper case, digits, a little punctuation)."""
from __future__ import annotations

import numpy as np

GLYPH_W, GLYPH_H, ADVANCE = 5, 7, 6
LINE_GAP = 3

_GLYPHS = {
    "A": ".###.|#...#|#...#|#####|#...#|#...#|#...#",
    "B": "####.|#...#|#...#|####.|#...#|#...#|####.",
    "C": ".###.|#...#|#....|#....|#....|#...#|.###.",
    "D": "####.|#...#|#...#|#...#|#...#|#...#|####.",
    "E": "#####|#....|#....|####.|#....|#....|#####",
    "F": "#####|#....|#....|####.|#....|#....|#....",
    "G": ".###.|#...#|#....|#.###|#...#|#...#|.####",
    "H": "#...#|#...#|#...#|#####|#...#|#...#|#...#",
    "I": ".###.|..#..|..#..|..#..|..#..|..#..|.###.",
    "J": "..###|...#.|...#.|...#.|...#.|#..#.|.##..",
    "K": "#...#|#..#.|#.#..|##...|#.#..|#..#.|#...#",
    "L": "#....|#....|#....|#....|#....|#....|#####",
    "M": "#...#|##.##|#.#.#|#.#.#|#...#|#...#|#...#",
    "N": "#...#|#...#|##..#|#.#.#|#..##|#...#|#...#",
    "O": ".###.|#...#|#...#|#...#|#...#|#...#|.###.",
    "P": "####.|#...#|#...#|####.|#....|#....|#....",
    "Q": ".###.|#...#|#...#|#...#|#.#.#|#..#.|.##.#",
    "R": "####.|#...#|#...#|####.|#.#..|#..#.|#...#",
    "S": ".####|#....|#....|.###.|....#|....#|####.",
    "T": "#####|..#..|..#..|..#..|..#..|..#..|..#..",
    "U": "#...#|#...#|#...#|#...#|#...#|#...#|.###.",
    "V": "#...#|#...#|#...#|#...#|#...#|.#.#.|..#..",
    "W": "#...#|#...#|#...#|#.#.#|#.#.#|#.#.#|.#.#.",
    "X": "#...#|#...#|.#.#.|..#..|.#.#.|#...#|#...#",
    "Y": "#...#|#...#|.#.#.|..#..|..#..|..#..|..#..",
    "Z": "#####|....#|...#.|..#..|.#...|#....|#####",
    "0": ".###.|#...#|#..##|#.#.#|##..#|#...#|.###.",
    "1": "..#..|.##..|..#..|..#..|..#..|..#..|.###.",
    "2": ".###.|#...#|....#|...#.|..#..|.#...|#####",
    "3": "#####|...#.|..#..|...#.|....#|#...#|.###.",
    "4": "...#.|..##.|.#.#.|#..#.|#####|...#.|...#.",
    "5": "#####|#....|####.|....#|....#|#...#|.###.",
    "6": "..##.|.#...|#....|####.|#...#|#...#|.###.",
    "7": "#####|....#|...#.|..#..|.#...|.#...|.#...",
    "8": ".###.|#...#|#...#|.###.|#...#|#...#|.###.",
    "9": ".###.|#...#|#...#|.####|....#|...#.|.##..",
    ".": ".....|.....|.....|.....|.....|.##..|.##..",
    ",": ".....|.....|.....|.....|.##..|..#..|.#...",
    "-": ".....|.....|.....|#####|.....|.....|.....",
    "&": ".##..|#..#.|#.#..|.#...|#.#.#|#..#.|.##.#",
    "/": ".....|....#|...#.|..#..|.#...|#....|.....",
    "'": "..#..|..#..|.#...|.....|.....|.....|.....",
    " ": ".....|.....|.....|.....|.....|.....|.....",
}

GLYPHS = {
    ch: np.array([[c == "#" for c in row] for row in spec.split("|")], dtype=bool)
    for ch, spec in _GLYPHS.items()
}


def text_size(lines: list[str]) -> tuple[int, int]:
    """Pixel (width, height) of a block of lines."""
    if not lines:
        return 0, 0
    width = max(len(line) for line in lines) * ADVANCE - 1
    height = len(lines) * GLYPH_H + (len(lines) - 1) * LINE_GAP
    return width, height


def render_line(canvas: np.ndarray, text: str, x: int, y: int, ink: int = 0) -> None:
    for i, ch in enumerate(text.upper()):
        glyph = GLYPHS.get(ch)
        if glyph is None:
            raise ValueError(f"no glyph for {ch!r}")
        x0 = x + i * ADVANCE
        canvas[y:y + GLYPH_H, x0:x0 + GLYPH_W][glyph] = ink


def render_block(canvas: np.ndarray, lines: list[str], cx: int, cy: int, ink: int = 0) -> None:
    """Draw lines centred on (cx, cy), each line centred horizontally."""
    _, height = text_size(lines)
    y = cy - height // 2
    for line in lines:
        w = len(line) * ADVANCE - 1
        render_line(canvas, line, cx - w // 2, y, ink)
        y += GLYPH_H + LINE_GAP
