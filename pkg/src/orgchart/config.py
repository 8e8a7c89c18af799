"""Pipeline settings, read from a flat ``key = value`` file."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path

from orgchart.features import DETECTORS, CornerParams
from orgchart.textmap import TextProvider

ENV_VAR = "ORGCHART_CONFIG"
STRATEGIES = ("global", "adaptive", "otsu", "junction_otsu")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    threshold: str = "junction_otsu"
    detector: str = "shi_tomasi"
    # corners
    harris_k: float = 0.04
    quality: float = 0.01
    min_distance: float = 7.0
    corner_window: int = 5
    corner_sigma: float = 1.0
    roi_radius: int = 5
    # nodes and points
    min_node_area: int = 300
    max_fill_gap: int = 0
    open_size: int = 5
    point_window: int = 15
    # thresholds
    junction_window: int = 31
    global_threshold: int = 128
    adaptive_window: int = 11
    adaptive_c: float = 5.0
    # inputs and outputs
    corpus: str = ""
    text_provider: str = "sidecar"
    text_timeout: float = 120.0
    out_dir: str = "."

    def __post_init__(self):
        if self.threshold not in STRATEGIES:
            raise ConfigError(f"threshold must be one of {STRATEGIES}, got {self.threshold!r}")
        if self.detector not in DETECTORS:
            raise ConfigError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        for name in ("point_window", "junction_window", "adaptive_window"):
            v = getattr(self, name)
            if v < 3 or v % 2 == 0:
                raise ConfigError(f"{name} must be an odd integer >= 3, got {v}")
        if not 0 <= self.global_threshold <= 255:
            raise ConfigError("global_threshold must lie in [0, 255]")
        if self.min_node_area < 1 or self.open_size < 1 or self.max_fill_gap < 0:
            raise ConfigError("min_node_area and open_size must be >= 1, max_fill_gap >= 0")
        try:
            self.corner_params()
            self.provider()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def corner_params(self) -> CornerParams:
        return CornerParams(k=self.harris_k, quality=self.quality,
                            min_distance=self.min_distance, window=self.corner_window,
                            sigma=self.corner_sigma)

    def provider(self) -> TextProvider:
        return TextProvider.parse(self.text_provider)

    def replace(self, **changes) -> "PipelineConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})


_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: expected {kind}, got {raw!r}") from exc
    return raw


def parse_config(text: str, base: PipelineConfig | None = None) -> PipelineConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment line.  Unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, value)
    return dataclasses.replace(base or PipelineConfig(), **values)


def load_config(path: str | Path | None = None) -> PipelineConfig:
    """Load ``path``, else the file named by $ORGCHART_CONFIG, else defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return PipelineConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
