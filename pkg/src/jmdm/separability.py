"""Per-feature class separability: Bhattacharyya and Jeffries-Matusita
distances between Gaussian class models, plus the Fisher score."""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from .dataset import LabeledDataset

#: class variances are clamped to at least this value
VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class ClassStats:
    """Class-conditional moments of every feature.

    Attributes
    ----------
    means, variances : ndarray, shape (n_features, n_classes)
        Population mean and (floored) population variance of each feature
        within each class.
    counts : ndarray, shape (n_classes,)
    """

    means: np.ndarray
    variances: np.ndarray
    counts: np.ndarray

    @property
    def n_features(self) -> int:
        return self.means.shape[0]

    @property
    def n_classes(self) -> int:
        return self.means.shape[1]


def compute_class_stats(ds: LabeledDataset, rows: Sequence[int] | None = None) -> ClassStats:
    X, y = ds.features, ds.y
    if rows is not None:
        rows = np.asarray(rows)
        X, y = X[rows], y[rows]
    C = ds.n_classes
    counts = np.bincount(y, minlength=C)
    missing = np.flatnonzero(counts == 0)
    if missing.size:
        names = [ds.classes[c] for c in missing]
        raise ValueError(f"classes {names} have no rows in the selection")
    means = np.empty((X.shape[1], C))
    variances = np.empty((X.shape[1], C))
    for c in range(C):
        Xc = X[y == c]
        means[:, c] = Xc.mean(axis=0)
        variances[:, c] = Xc.var(axis=0)
    np.maximum(variances, VARIANCE_FLOOR, out=variances)
    return ClassStats(means=means, variances=variances, counts=counts)


def bhattacharyya(mu1, var1, mu2, var2):
    """Bhattacharyya distance between N(mu1, var1) and N(mu2, var2).

    Broadcasts over array arguments. The log term is evaluated as a
    difference of logs so equal variances give exactly zero.
    """
    mu1, var1, mu2, var2 = (np.asarray(a, dtype=np.float64) for a in (mu1, var1, mu2, var2))
    if np.any(var1 <= 0) or np.any(var2 <= 0):
        raise ValueError("variances must be strictly positive")
    vsum = var1 + var2
    gap = 0.25 * (mu1 - mu2) ** 2 / vsum
    spread = 0.5 * np.log(0.5 * vsum) - 0.25 * (np.log(var1) + np.log(var2))
    b = gap + np.maximum(spread, 0.0)
    return b[()] if b.ndim == 0 else b


def jm_from_b(b):
    """Jeffries-Matusita distance ``2 (1 - exp(-b))``.

    Saturates to exactly 2.0 in double precision once ``b`` exceeds ~37.
    """
    return -2.0 * np.expm1(-np.asarray(b, dtype=np.float64))[()]


@dataclass(frozen=True)
class JmProfile:
    """The ``C x C`` JM matrix of one feature and its mean entry."""

    matrix: np.ndarray
    mean_score: float

    @property
    def flat(self) -> np.ndarray:
        return self.matrix.reshape(-1)


def jm_matrices(stats: ClassStats) -> np.ndarray:
    """All JM matrices stacked as an ``(M, C, C)`` array."""
    mu, var = stats.means, stats.variances
    b = bhattacharyya(mu[:, :, None], var[:, :, None], mu[:, None, :], var[:, None, :])
    jm = jm_from_b(b)
    idx = np.arange(stats.n_classes)
    jm[:, idx, idx] = 0.0
    return jm


def compute_jm_profiles(stats: ClassStats) -> list[JmProfile]:
    jm = jm_matrices(stats)
    means = jm.mean(axis=(1, 2))
    profiles = []
    for m in range(jm.shape[0]):
        mat = jm[m].copy()
        mat.setflags(write=False)
        profiles.append(JmProfile(matrix=mat, mean_score=float(means[m])))
    return profiles


def mean_scores(profiles: Sequence[JmProfile]) -> np.ndarray:
    return np.array([p.mean_score for p in profiles], dtype=np.float64)


def profile_matrix(profiles: Sequence[JmProfile]) -> np.ndarray:
    """Row-stack the flattened JM matrices into the ``(M, C*C)`` point cloud."""
    return np.vstack([p.flat for p in profiles])


def fisher_scores(stats: ClassStats) -> np.ndarray:
    """Between-class scatter over within-class variance, per feature."""
    n = stats.counts.astype(np.float64)
    overall = stats.means @ n / n.sum()
    between = ((stats.means - overall[:, None]) ** 2) @ n
    within = stats.variances @ n
    return between / within


def write_profiles_csv(profiles: Sequence[JmProfile], out: str | TextIO | None = None) -> None:
    """CSV rows: ``feature_index, mean_score, jm_0_0 .. jm_{C-1}_{C-1}``."""
    C = profiles[0].matrix.shape[0] if profiles else 0
    header = ["feature_index", "mean_score"] + [f"jm_{a}_{b}" for a in range(C) for b in range(C)]
    fh = open(out, "w", newline="", encoding="utf-8") if isinstance(out, str) else (out or sys.stdout)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, p in enumerate(profiles):
            w.writerow([i, repr(p.mean_score)] + [repr(float(v)) for v in p.flat])
    finally:
        if isinstance(out, str):
            fh.close()
