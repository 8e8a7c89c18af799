"""Synthetic org-chart rasters with ground truth."""
from orgchart.synthgen.generator import (
    LAYOUTS,
    NOISE_KINDS,
    SHAPES,
    GenSpec,
    GroundTruth,
    Junction,
    LayoutError,
    NoiseSpec,
    break_connector,
    generate,
    perturb,
    sample_specs,
    write_sample,
)

__all__ = [
    "LAYOUTS", "NOISE_KINDS", "SHAPES", "GenSpec", "GroundTruth", "Junction", "LayoutError",
    "NoiseSpec", "break_connector", "generate", "perturb", "sample_specs", "write_sample",
]
