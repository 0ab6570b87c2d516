"""Feature selection: the JM-DM sampler plus ranking and random baselines."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .separability import JmProfile, mean_scores
from .spectral import SpectralEmbedding


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class SelectionConfig:
    k_star: int
    q: float = 0.25
    kmeans_seed: int = 0
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-6

    def __post_init__(self):
        if self.k_star < 1:
            raise ValueError("k_star must be at least 1")
        if not 0.0 <= self.q < 1.0:
            raise ValueError("q must lie in [0, 1)")
        if self.kmeans_restarts < 1 or self.kmeans_max_iter < 1:
            raise ValueError("kmeans_restarts and kmeans_max_iter must be positive")
        if not self.kmeans_tol > 0:
            raise ValueError("kmeans_tol must be positive")


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[int, ...]
    method: str = ""
    q: float | None = None
    seed: int | None = None
    clusters: dict[int, int] = field(default_factory=dict)
    dropped_by_quantile: tuple[int, ...] = ()

    @property
    def k_star(self) -> int:
        return len(self.selected)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "k_star": self.k_star,
            "q": self.q,
            "seed": self.seed,
            "selected": list(self.selected),
            "dropped_by_quantile": list(self.dropped_by_quantile),
            "clusters": {str(k): v for k, v in sorted(self.clusters.items())},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _as_scores(profiles) -> np.ndarray:
    if len(profiles) and isinstance(profiles[0], JmProfile):
        return mean_scores(profiles)
    return np.asarray(profiles, dtype=np.float64)


def quantile_threshold(values, q: float) -> float:
    """Smallest value whose empirical CDF exceeds ``q``.

    Dropping everything strictly below it removes the lowest
    ``floor(q * n)`` values, fewer when ties straddle the cut.
    """
    v = np.sort(np.asarray(values, dtype=np.float64))
    # 1e-9 slack so q=0.3 with n=10 lands on index 3 despite binary rounding of q
    return float(v[math.floor(q * v.size + 1e-9)])


def quantile_filter(profiles: Sequence[JmProfile] | np.ndarray, q: float, k_star: int | None = None) -> np.ndarray:
    """Indices of features whose mean JM score is not below the q-quantile.

    ``profiles`` may also be a plain vector of mean scores.
    """
    if not 0.0 <= q < 1.0:
        raise ValueError("q must lie in [0, 1)")
    scores = _as_scores(profiles)
    cut = quantile_threshold(scores, q)
    survivors = np.flatnonzero(scores >= cut)
    if k_star is not None and survivors.size < k_star:
        raise SelectionError(
            f"only {survivors.size} features survive the q={q} cut but k_star={k_star}; lower q"
        )
    return survivors


class KMeansResult(NamedTuple):
    labels: np.ndarray
    centers: np.ndarray
    inertia: float


def _sq_dists(X, centers):
    return ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _careful_seeding(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    closest = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        # points already used (and their duplicates) carry zero weight
        pick = rng.choice(n, p=closest / closest.sum())
        centers[c] = X[pick]
        np.minimum(closest, ((X - centers[c]) ** 2).sum(axis=1), out=closest)
    return centers


def _repair_empty(X, labels, dists, k):
    counts = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(counts == 0):
        own = dists[np.arange(X.shape[0]), labels]
        # only steal from clusters that keep at least one member
        own = np.where(counts[labels] > 1, own, -np.inf)
        far = int(np.argmax(own))
        counts[labels[far]] -= 1
        labels[far] = c
        counts[c] = 1
    return labels


def _lloyd(X, k, rng, max_iter, tol):
    centers = _careful_seeding(X, k, rng)
    for _ in range(max_iter):
        dists = _sq_dists(X, centers)
        labels = _repair_empty(X, np.argmin(dists, axis=1), dists, k)
        new = np.array([X[labels == c].mean(axis=0) for c in range(k)])
        shift = float(((new - centers) ** 2).sum())
        centers = new
        if shift <= tol:
            break
    dists = _sq_dists(X, centers)
    labels = _repair_empty(X, np.argmin(dists, axis=1), dists, k)
    centers = np.array([X[labels == c].mean(axis=0) for c in range(k)])
    inertia = float(((X - centers[labels]) ** 2).sum())
    return KMeansResult(labels, centers, inertia)


def kmeans(points, k: int, seed: int = 0, restarts: int = 10, max_iter: int = 300, tol: float = 1e-6) -> KMeansResult:
    """Lloyd's algorithm with distance-squared seeding, best of ``restarts``.

    Restart ``r`` draws from child ``r`` of ``SeedSequence(seed)``, so a run
    with more restarts always contains the runs of a run with fewer.
    Every returned cluster is nonempty.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if k < 1:
        raise ValueError("k must be positive")
    distinct = np.unique(X, axis=0).shape[0]
    if k > distinct:
        raise SelectionError(f"k={k} exceeds the number of distinct points ({distinct})")
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        res = _lloyd(X, k, np.random.default_rng(child), max_iter, tol)
        if best is None or res.inertia < best.inertia:
            best = res
    return best


def _representatives(labels, survivors, scores, k):
    chosen = []
    for c in range(k):
        members = survivors[labels == c]
        # members are ascending, so argmax keeps the lowest index on ties
        chosen.append(int(members[np.argmax(scores[members])]))
    return chosen


def select_jmdm(
    profiles: Sequence[JmProfile], emb: SpectralEmbedding | None, cfg: SelectionConfig
) -> SelectionResult:
    """Cluster the surviving features in diffusion space and keep the best of each cluster.

    When exactly ``k_star`` features survive the quantile cut they are all
    returned without clustering; ``emb`` may then be None (useful when the
    profiles are too degenerate to embed).
    """
    scores = _as_scores(profiles)
    if emb is not None and emb.coordinates.shape[0] != scores.size:
        raise ValueError("embedding rows and profiles must describe the same features")
    survivors = quantile_filter(scores, cfg.q, cfg.k_star)
    dropped = np.setdiff1d(np.arange(scores.size), survivors)
    if survivors.size == cfg.k_star:
        return SelectionResult(
            selected=tuple(int(i) for i in survivors),
            method="jmdm",
            q=cfg.q,
            seed=cfg.kmeans_seed,
            clusters={int(f): c for c, f in enumerate(survivors)},
            dropped_by_quantile=tuple(int(i) for i in dropped),
        )
    if emb is None:
        raise SelectionError(
            f"choosing {cfg.k_star} of {survivors.size} surviving features needs an embedding, and none is available"
        )
    km = kmeans(
        emb.coordinates[survivors],
        cfg.k_star,
        seed=cfg.kmeans_seed,
        restarts=cfg.kmeans_restarts,
        max_iter=cfg.kmeans_max_iter,
        tol=cfg.kmeans_tol,
    )
    chosen = _representatives(km.labels, survivors, scores, cfg.k_star)
    return SelectionResult(
        selected=tuple(sorted(chosen)),
        method="jmdm",
        q=cfg.q,
        seed=cfg.kmeans_seed,
        clusters={int(f): int(c) for f, c in zip(survivors, km.labels)},
        dropped_by_quantile=tuple(int(i) for i in dropped),
    )


def select_random(n_features: int, k_star: int, seed: int) -> SelectionResult:
    if not 1 <= k_star <= n_features:
        raise SelectionError(f"k_star must be in [1, {n_features}], got {k_star}")
    rng = np.random.default_rng(seed)
    picked = rng.choice(n_features, size=k_star, replace=False)
    return SelectionResult(selected=tuple(sorted(int(i) for i in picked)), method="random", seed=seed)


def select_top_ranked(scores, k_star: int, method: str = "ranked") -> SelectionResult:
    """The ``k_star`` highest scores, ties going to the lower index."""
    scores = np.asarray(scores, dtype=np.float64)
    if not 1 <= k_star <= scores.size:
        raise SelectionError(f"k_star must be in [1, {scores.size}], got {k_star}")
    order = np.argsort(-scores, kind="stable")[:k_star]
    return SelectionResult(selected=tuple(sorted(int(i) for i in order)), method=method)
