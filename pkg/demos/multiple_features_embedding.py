"""
The Multiple-Features digits in diffusion space
===============================================

649 features from six descriptor families (Fourier, profile correlations,
Karhunen-Loeve, pixel averages, Zernike moments, morphology) describe 2000
handwritten digits. We embed the features by their class-separability
profiles and look at which families the selected features come from.

Run ``python scripts/fetch_mfeat.py`` first if ``data/mfeat.csv.gz`` is
missing. Pass an output path to also write the embedding as CSV.
"""

import collections
import sys
from pathlib import Path

import numpy as np

import jmdm

path = Path(__file__).resolve().parents[1] / "data" / "mfeat.csv.gz"
ds = jmdm.load_csv(path, label_column="digit")
print(f"{ds.n_samples} samples, {ds.n_features} features, {ds.n_classes} classes")

# %% z-score, then one 10x10 JM matrix per feature
X = jmdm.fit_standardizer(ds).transform(ds.features)
ds = jmdm.LabeledDataset.from_arrays(X, ds.labels, feature_names=ds.feature_names)
profiles = jmdm.compute_jm_profiles(jmdm.compute_class_stats(ds))
scores = jmdm.mean_scores(profiles)
family = np.array([name.split("_")[0] for name in ds.feature_names])

for fam in dict.fromkeys(family):
    s = scores[family == fam]
    print(f"  {fam}: {s.size:3d} features, mean JM {s.mean():.3f}, best {s.max():.3f}")

# %% three diffusion coordinates, as in the usual scatter plot colored by mean JM
emb = jmdm.diffusion_map(jmdm.profile_matrix(profiles), jmdm.KernelConfig(dim=3))
print(f"\nkernel scale {emb.epsilon:.4g}, eigenvalues {np.round(emb.eigenvalues, 4)}")

# %% select 1/32 of the features and see where they come from
k = jmdm.fraction_to_count(ds.n_features, "1/32")
sel = jmdm.select_jmdm(profiles, emb, jmdm.SelectionConfig(k_star=k))
top = jmdm.select_top_ranked(scores, k)
print(f"\nJM-DM picks {k} features by family: {dict(collections.Counter(family[list(sel.selected)].tolist()))}")
print(f"top-{k} by mean JM by family:   {dict(collections.Counter(family[list(top.selected)].tolist()))}")

if len(sys.argv) > 1:
    with open(sys.argv[1], "w", newline="") as fh:
        jmdm.spectral.write_embedding_csv(emb, scores, fh)
    print(f"embedding written to {sys.argv[1]}")
