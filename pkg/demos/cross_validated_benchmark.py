"""
Cross-validated KNN accuracy for three selectors
================================================

Five stratified folds. Inside each fold the standardizer, the JM profiles,
the embedding and every selection are fitted on the training rows only;
the test rows are classified with 5-NN on the selected columns.
"""

import sys
import time
from pathlib import Path

import jmdm

path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "data" / "mfeat.csv.gz"
label = sys.argv[2] if len(sys.argv) > 2 else "digit"
ds = jmdm.load_csv(path, label_column=label)

cfg = jmdm.EvalConfig(fractions=("1/8", "1/16", "1/32"), methods=("jmdm", "fisher", "random"))
for f in cfg.fractions:
    print(f"fraction {f} -> {jmdm.fraction_to_count(ds.n_features, f)} features")

start = time.perf_counter()
report = jmdm.run_benchmark(ds, cfg, threads=None, progress=print)
print(f"\n{report.format_table()}\n({time.perf_counter() - start:.1f}s)")

# %% per-fold spread for JM-DM
for f in cfg.fractions:
    accs = report.cells[("jmdm", f)].accuracies
    print(f"jmdm {f}: folds {[round(a, 3) for a in accs]}")
