"""Text recognition adapters and text-to-node assignment.

No OCR engine is bundled.  ``sidecar`` reads the ground-truth JSON written
next to a synthetic image; ``external:<cmd>`` runs ``<cmd> <image-path>``
and parses a JSON list of ``{"bbox": [x1, y1, x2, y2], "text": str,
"confidence": float}`` from its stdout.
"""
from __future__ import annotations

import json
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from orgchart.model import BBox, Diagnostic


class TextProviderError(RuntimeError):
    def __init__(self, provider: str, message: str, stderr: str = ""):
        self.provider = provider
        self.stderr = stderr
        super().__init__(f"[{provider}] {message}" + (f": {stderr.strip()}" if stderr else ""))


@dataclass(frozen=True)
class TextBox:
    bbox: BBox
    text: str
    confidence: float = 1.0


@dataclass(frozen=True)
class TextProvider:
    kind: str = "sidecar"
    command: str | None = None

    @classmethod
    def parse(cls, spec: str) -> "TextProvider":
        spec = spec.strip()
        if spec == "sidecar":
            return cls("sidecar")
        if spec.startswith("external:") and spec[len("external:"):].strip():
            return cls("external", spec[len("external:"):].strip())
        raise ValueError(f"text provider must be 'sidecar' or 'external:<cmd>', got {spec!r}")

    def __str__(self) -> str:
        return self.kind if self.kind == "sidecar" else f"external:{self.command}"


def sidecar_path(image_path: str | Path) -> Path:
    p = Path(image_path)
    return p.with_name(p.stem + ".truth.json")


def _boxes_from_json(items, provider: str) -> list[TextBox]:
    if not isinstance(items, list):
        raise TextProviderError(provider, "expected a JSON list of text boxes")
    boxes = []
    for i, item in enumerate(items):
        try:
            text = str(item["text"])
            conf = float(item.get("confidence", 1.0))
            box = BBox.from_list(item["bbox"])
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise TextProviderError(provider, f"malformed text box {i}: {exc}") from exc
        if text.strip():
            boxes.append(TextBox(box, text, min(1.0, max(0.0, conf))))
    return boxes


def recognize(image_path: str | Path, provider: TextProvider, timeout: float = 120.0
              ) -> list[TextBox]:
    if provider.kind == "sidecar":
        path = sidecar_path(image_path)
        if not path.exists():
            raise TextProviderError("sidecar", f"missing sidecar file {path}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise TextProviderError("sidecar", f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(payload, dict) or not isinstance(payload.get("nodes"), list):
            raise TextProviderError("sidecar", f"{path} has no 'nodes' list")
        return _boxes_from_json(payload["nodes"], "sidecar")

    if provider.kind == "external":
        name = str(provider)
        cmd = shlex.split(provider.command or "") + [str(image_path)]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise TextProviderError(name, f"could not run command: {exc}") from exc
        if proc.returncode != 0:
            raise TextProviderError(name, f"exit status {proc.returncode}", proc.stderr)
        try:
            items = json.loads(proc.stdout)
        except json.JSONDecodeError as exc:
            raise TextProviderError(name, f"malformed JSON output: {exc}", proc.stderr) from exc
        return _boxes_from_json(items, name)

    raise TextProviderError(provider.kind, "unknown provider kind")


def assign_text(boxes: Sequence[TextBox], nodes: Sequence,
                diagnostics: list[Diagnostic] | None = None) -> dict[int, str]:
    """Merge text boxes into the node whose bbox contains each box centre.

    Boxes are joined in reading order (centre y, then centre x).  When node
    boxes overlap the smaller node wins; boxes outside every node are dropped
    and reported.
    """
    parts: dict[int, list[tuple[float, float, str]]] = {n.id: [] for n in nodes}
    for box in boxes:
        cx, cy = box.bbox.center
        hits = [(n.bbox.area, n.id) for n in nodes if n.bbox.contains(cx, cy)]
        if not hits:
            if diagnostics is not None:
                diagnostics.append(Diagnostic(
                    "dropped_text", f"text {box.text!r} at {box.bbox.as_list()} lies in no node",
                    severity="warning"))
            continue
        parts[min(hits)[1]].append((cy, cx, box.text))
    return {nid: " ".join(" ".join(t.split()) for _, _, t in sorted(items))
            for nid, items in parts.items()}
