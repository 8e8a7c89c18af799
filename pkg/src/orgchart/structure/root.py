"""Seniority corpus and root-node selection."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from orgchart.model import BBox, Diagnostic

_PUNCT = re.compile(r"[^\w\s]", re.UNICODE)


def normalize_title(text: str) -> str:
    """Lowercase, punctuation to spaces, collapsed whitespace."""
    return " ".join(_PUNCT.sub(" ", text.lower()).split())


@dataclass(frozen=True)
class SeniorityCorpus:
    entries: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for title, score in self.entries.items():
            key = normalize_title(title)
            if not key:
                raise ValueError("empty corpus title")
            if not score > 0:
                raise ValueError(f"corpus score for {title!r} must be positive")
            clean[key] = float(score)
        object.__setattr__(self, "entries", clean)
        object.__setattr__(self, "_tokens", {k: tuple(k.split()) for k in clean})

    @classmethod
    def parse(cls, text: str) -> "SeniorityCorpus":
        entries = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                title, score = line.rsplit("\t", 1)
                value = float(score)
            except ValueError as exc:
                raise ValueError(f"corpus line {lineno}: expected 'title<TAB>score'") from exc
            if not 0.0 < value <= 1.0:
                raise ValueError(f"corpus line {lineno}: score {value} outside (0, 1]")
            entries[title] = value
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "SeniorityCorpus":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> "SeniorityCorpus":
        text = resources.files("orgchart").joinpath("data/corpus.tsv").read_text(encoding="utf-8")
        return cls.parse(text)

    def scaled(self, factor: float) -> "SeniorityCorpus":
        return SeniorityCorpus({k: v * factor for k, v in self.entries.items()})

    def match(self, text: str) -> tuple[str, float] | None:
        """Longest corpus title occurring in ``text`` as a whole-word phrase.

        Equal-length matches resolve to the higher score, then alphabetically.
        """
        tokens = normalize_title(text).split()
        best = None
        for key, ktoks in self._tokens.items():
            k = len(ktoks)
            if k > len(tokens):
                continue
            if any(tuple(tokens[i:i + k]) == ktoks for i in range(len(tokens) - k + 1)):
                rank = (len(key), self.entries[key], tuple(-ord(ch) for ch in key))
                if best is None or rank > best[0]:
                    best = (rank, key)
        return None if best is None else (best[1], self.entries[best[1]])

    def score(self, text: str) -> float:
        hit = self.match(text)
        return 0.0 if hit is None else hit[1]


def select_root(nodes_with_text: Sequence[tuple[object, str]], corpus: SeniorityCorpus,
                diagnostics: list[Diagnostic] | None = None) -> int:
    """Id of the most senior node; ties go to the topmost, then leftmost node.

    ``nodes_with_text`` pairs objects exposing ``id`` and ``bbox`` with their
    text.  When nothing matches the corpus the topmost node is returned and a
    ``root_fallback`` diagnostic is appended to ``diagnostics``.
    """
    if not nodes_with_text:
        raise ValueError("select_root needs at least one node")

    def pos(node) -> tuple[int, int]:
        box: BBox = node.bbox
        return box.y1, box.x1

    scored = [(corpus.score(text), node) for node, text in nodes_with_text]
    top = max(s for s, _ in scored)
    pool = [n for s, n in scored if s == top]
    choice = min(pool, key=pos)
    if top <= 0.0 and diagnostics is not None:
        diagnostics.append(Diagnostic(
            "root_fallback", f"no node text matched the seniority corpus; using topmost node "
            f"{choice.id}", (choice.id,), severity="warning"))
    return choice.id
