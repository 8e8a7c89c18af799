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
# # How extraction degrades with pixel noise
#
# The same 30 charts at increasing gaussian noise.  Node similarity holds up
# because boxes are large; structure suffers first, when a one-pixel
# connector loses a pixel and its child turns into an orphan.

# %%
import dataclasses
import statistics
import tempfile
from pathlib import Path

import matplotlib.pyplot as plt

from orgchart.pipeline import evaluate_files, extract
from orgchart.synthgen import NoiseSpec, generate, sample_specs, write_sample

# %%
specs = sample_specs(30, seed=5)
sigmas = [0, 4, 8, 12, 16]
work = Path(tempfile.mkdtemp())

# %%
summary = {}
for sigma in sigmas:
    ns, sa, orphans = [], [], 0
    for i, spec in enumerate(specs):
        spec = dataclasses.replace(spec, noise=NoiseSpec.gaussian(sigma))
        img, truth = generate(spec)
        name = f"s{sigma}_{i}"
        write_sample(work, name, img, truth, ink_map=False)
        res = extract(work / f"{name}.png", out_dir=work / "out")
        if res.exit_code:
            ns.append(0.0)
            sa.append(0.0)
            continue
        r = evaluate_files(work / f"{name}.truth.json", res.table_json)
        ns.append(r.node_similarity)
        sa.append(r.structural_accuracy)
        orphans += sum(d.kind == "orphan" for d in res.diagnostics)
    summary[sigma] = (statistics.fmean(ns), statistics.fmean(sa), orphans)
summary

# %%
plt.plot(sigmas, [summary[s][0] for s in sigmas], "o-", label="N_S")
plt.plot(sigmas, [summary[s][1] for s in sigmas], "s-", label="S_A")
plt.xlabel("noise sigma")
plt.ylabel("mean score")
plt.ylim(0, 1.05)
plt.legend()
plt.show()

# %% [markdown]
# Thicker strokes survive the same noise much better.

# %%
thick = []
for i, spec in enumerate(specs[:15]):
    spec = dataclasses.replace(spec, stroke_width=3, noise=NoiseSpec.gaussian(12))
    img, truth = generate(spec)
    write_sample(work, f"t{i}", img, truth, ink_map=False)
    res = extract(work / f"t{i}.png", out_dir=work / "out")
    if res.exit_code == 0:
        thick.append(evaluate_files(work / f"t{i}.truth.json", res.table_json).total_score)
statistics.fmean(thick) if thick else None
