# ---
# jupyter:
#   jupytext:
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3 (ipykernel)
#     language: python
#     name: python3
# ---

# %% [markdown]
# # Four ways to binarize a chart
#
# A fixed cut at 128, adaptive mean, whole-image OTSU and OTSU over windows
# around junction points, on a chart whose background fades from 80 to 180.

# %%
import tempfile
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from orgchart.pipeline import STRATEGY_NAMES, compare_thresholds
from orgchart.synthgen import GenSpec, NoiseSpec, generate, write_sample

# %%
work = Path(tempfile.mkdtemp())
img, truth = generate(GenSpec(node_count=14, seed=3, noise=NoiseSpec.gradient(80, 180)))
write_sample(work, "grad", img, truth)
cmp = compare_thresholds(work / "grad.png", out_dir=work)
cmp.thresholds

# %%
fig, axes = plt.subplots(2, 2, figsize=(12, 9))
for ax, name in zip(axes.flat, STRATEGY_NAMES):
    ax.imshow(cmp.masks[name], cmap="gray")
    m = cmp.metrics[name]
    ax.set_title(f"{name}: F1 {m['f1']:.3f}, connectors {m['edge_f1']:.3f}")
    ax.axis("off")
plt.tight_layout()
plt.show()

# %% [markdown]
# The whole-image threshold lands inside the background ramp, so the dark
# half of the page turns into ink.  Windows around junctions see mostly
# line and nearby paper, which is a cleaner two-class split.

# %%
for name in STRATEGY_NAMES:
    m = cmp.metrics[name]
    print(f"{name:14s} precision {m['precision']:.3f}  recall {m['recall']:.3f}  F1 {m['f1']:.3f}")

# %% [markdown]
# ## Over a set of gradient charts

# %%
rows = []
for seed in range(10):
    img, truth = generate(GenSpec(node_count=10, seed=100 + seed,
                                  noise=NoiseSpec.gradient(80, 180)))
    write_sample(work, f"g{seed}", img, truth)
    res = compare_thresholds(work / f"g{seed}.png", out_dir=work / "masks")
    rows.append([res.metrics[k]["edge_f1"] for k in STRATEGY_NAMES])
rows = np.array(rows)
dict(zip(STRATEGY_NAMES, rows.mean(axis=0).round(3)))
