"""
Run lengths and the 27-feature descriptor
=========================================

A run is a stretch of epochs with no stage change. Average run length alone
separates the simulated cohorts; this script prints per-cohort quantiles and
optionally draws the violin plot.
"""

import csv
import os
import tempfile

from sleeparch import builtin_spec, generate_corpus, run_length_encode
from sleeparch.features import FEATURE_NAMES, extract_features
from sleeparch.report import export_violin_data

pat = generate_corpus(builtin_spec("patient"), 100, 960, seed=1, cohort="patient")
hea = generate_corpus(builtin_spec("healthy"), 100, 960, seed=2, cohort="healthy")
data = pat.merged(hea)

h = pat.recordings[0]
runs = run_length_encode(h)
print(f"{h.subject_id}: {len(h)} epochs in {len(runs)} runs; first runs:",
      [(r.stage.name, r.length) for r in runs[:6]])

vec = extract_features(h)
for name, value in zip(FEATURE_NAMES[20:], vec[20:]):
    print(f"  {name:15s} {value:.4f}")

out = tempfile.mkdtemp(prefix="sleeparch-")
values_path, quant_path = export_violin_data(data, "avg_run_length", os.path.join(out, "avg_run_length.csv"))
with open(quant_path) as fh:
    for row in csv.DictReader(fh):
        print(row)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    with open(values_path) as fh:
        rows = list(csv.DictReader(fh))
    groups = [[float(r["value"]) for r in rows if r["cohort"] == c] for c in ("patient", "healthy")]
    fig, ax = plt.subplots(figsize=(4, 3))
    ax.violinplot(groups, showmedians=True)
    ax.set_xticks([1, 2], ["patient", "healthy"])
    ax.set_ylabel("average run length (epochs)")
    fig.tight_layout()
    fig.savefig(os.path.join(out, "avg_run_length.png"), dpi=120)
    print("plot written to", os.path.join(out, "avg_run_length.png"))
