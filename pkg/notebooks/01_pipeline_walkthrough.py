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
# # From pixels to a reporting table
#
# One synthetic chart, followed through every stage: binarization, node
# boxes, corner points, junction filtering, and the connector walk that
# recovers parent links.

# %%
import tempfile
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

from orgchart.pipeline import analyze, evaluate_files, extract
from orgchart.structure import JUNCTION_POINT, NODE_POINT
from orgchart.synthgen import GenSpec, generate, write_sample

# %%
spec = GenSpec(node_count=12, max_depth=4, seed=7)
img, truth = generate(spec)
img.shape, len(truth.graph.nodes), len(truth.junctions)

# %%
plt.figure(figsize=(10, 7.5))
plt.imshow(img, cmap="gray")
plt.axis("off")
plt.title("generated chart")
plt.show()

# %% [markdown]
# ## Nodes and points
#
# `analyze` runs everything up to the traversal.  Node points sit where a
# connector meets a box; junction points are the T, L and cross bends in
# between.

# %%
a = analyze(img)
kinds = [p.kind for p in a.points]
print(a.threshold)
print(len(a.nodes), "nodes,", kinds.count(NODE_POINT), "node points,",
      kinds.count(JUNCTION_POINT), "junction points")

# %%
fig, ax = plt.subplots(figsize=(10, 7.5))
ax.imshow(a.mask, cmap="gray")
for n in a.nodes:
    b = n.bbox
    ax.add_patch(plt.Rectangle((b.x1, b.y1), b.width, b.height, fill=False, ec="tab:blue"))
for kind, colour in ((NODE_POINT, "tab:orange"), (JUNCTION_POINT, "tab:red")):
    pts = np.array([(p.x, p.y) for p in a.points if p.kind == kind])
    if len(pts):
        ax.scatter(pts[:, 0], pts[:, 1], s=18, c=colour, label=kind)
ax.legend(loc="lower right")
ax.axis("off")
plt.show()

# %% [markdown]
# Every drawn junction should have a classified junction point within 2 px.

# %%
found = np.array([(p.x, p.y) for p in a.points if p.kind == JUNCTION_POINT])
gaps = [np.abs(found - (j.x, j.y)).max(axis=1).min() for j in truth.junctions]
max(gaps)

# %% [markdown]
# ## The table
#
# `extract` adds text from the sidecar file, picks the root by title
# seniority and walks the connectors.

# %%
work = Path(tempfile.mkdtemp())
write_sample(work, "chart", img, truth)
res = extract(work / "chart.png", out_dir=work)
print(res.table_csv.read_text())

# %%
report = evaluate_files(work / "chart.truth.json", res.table_json)
report.summary()
