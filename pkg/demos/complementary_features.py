"""
Why cluster instead of rank?
============================

Two groups of features on a 3-class problem. Features 0-3 pull class 2 away
from the others and features 4-7 do the same for class 3. Group A has the
larger gaps, so ranking by mean JM score picks two group-A features and
leaves classes 1 and 3 tangled. JM-DM clusters features by *which* class
pairs they separate, so it takes one feature from each group.
"""

import itertools

import numpy as np

import jmdm

rng = np.random.default_rng(0)
n = 40
y = np.repeat([1, 2, 3], n)
cols = []
for gap in (3.0, 2.8, 2.6, 2.4):
    cols.append(rng.normal(size=3 * n) + gap * (y == 2))
for gap in (2.2, 2.0, 1.8, 1.6):
    cols.append(rng.normal(size=3 * n) + gap * (y == 3))
ds = jmdm.LabeledDataset.from_arrays(np.column_stack(cols), y)

# %% separability profiles: one C x C matrix of pairwise JM values per feature
stats = jmdm.compute_class_stats(ds)
profiles = jmdm.compute_jm_profiles(stats)
scores = jmdm.mean_scores(profiles)
print("mean JM score per feature:", np.round(scores, 3))
print("feature 0 profile:\n", np.round(profiles[0].matrix, 3))
print("feature 4 profile:\n", np.round(profiles[4].matrix, 3))

# %% the embedding places the two groups far apart
emb = jmdm.diffusion_map(jmdm.profile_matrix(profiles), jmdm.KernelConfig(dim=2))
print("\ndiffusion coordinates (first two):")
for i, row in enumerate(emb.coordinates):
    print(f"  feature {i}: {row[0]:+.4f} {row[1]:+.4f}")

# %% compare the two selections
ranked = jmdm.select_top_ranked(scores, 2)
picked = jmdm.select_jmdm(profiles, emb, jmdm.SelectionConfig(k_star=2, q=0.0))
print("\ntop-2 by mean JM:", ranked.selected)
print("JM-DM with k*=2: ", picked.selected)


# the weakest class pair decides how usable a feature pair is
def worst_pair(features):
    best = np.max([profiles[f].matrix for f in features], axis=0)
    return best[~np.eye(3, dtype=bool)].min()


print(f"\nworst class-pair JM, top-2 pair: {worst_pair(ranked.selected):.3f}")
print(f"worst class-pair JM, JM-DM pair: {worst_pair(picked.selected):.3f}")
best = max(itertools.combinations(range(8), 2), key=worst_pair)
print(f"best possible pair {best}: {worst_pair(best):.3f}")
