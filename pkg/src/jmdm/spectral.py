"""Diffusion maps over a point cloud (here: one point per feature).

The Markov matrix ``K = D^-1 W_alpha`` is not symmetric, but it is
conjugate to ``S = D^-1/2 W_alpha D^-1/2``; we diagonalize ``S`` with a
symmetric solver and map the eigenvectors back.  Eigenvectors are scaled
so that ``psi_0 == 1`` and ``phi_0`` is the stationary distribution
(sums to 1); with that scaling the left/right sets are biorthonormal and
the Euclidean distance between full-spectrum coordinates equals the
diffusion distance.
"""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass
from typing import NamedTuple, Sequence, TextIO

import numpy as np
from scipy.linalg import eigh
from scipy.spatial.distance import cdist


class DegenerateInputError(ValueError):
    pass


@dataclass(frozen=True)
class KernelConfig:
    epsilon_factor: float = 1.0
    alpha: float = 1.0
    dim: int = 3

    def __post_init__(self):
        if not self.epsilon_factor > 0:
            raise ValueError("epsilon_factor must be positive")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.dim < 1:
            raise ValueError("embedding dimension must be at least 1")


@dataclass(frozen=True)
class SpectralEmbedding:
    """Diffusion-maps coordinates of ``M`` points.

    Attributes
    ----------
    epsilon : float
        Kernel scale actually used.
    eigenvalues : ndarray, shape (d,)
        ``lambda_1 >= ... >= lambda_d``; the trivial ``lambda_0 = 1`` is
        not included.
    psi : ndarray, shape (M, d)
        Right eigenvectors ``psi_1 .. psi_d``.
    coordinates : ndarray, shape (M, d)
        ``lambda_l * psi_l`` row by row.
    stationary : ndarray, shape (M,)
        First left eigenvector, normalized to sum to 1.
    """

    epsilon: float
    eigenvalues: np.ndarray
    psi: np.ndarray
    coordinates: np.ndarray
    stationary: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


class MarkovKernel(NamedTuple):
    matrix: np.ndarray
    degrees: np.ndarray
    epsilon: float


class Eigensystem(NamedTuple):
    """Full decomposition ``K = sum_l lambda_l psi_l phi_l^T``."""

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray


def pairwise_sq_distances(Z) -> np.ndarray:
    Z = np.asarray(Z, dtype=np.float64)
    return cdist(Z, Z, "sqeuclidean")


def heuristic_epsilon(Z) -> float:
    """Largest nearest-neighbour squared distance over the rows of ``Z``."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] < 2:
        raise ValueError("need at least two points")
    d2 = pairwise_sq_distances(Z)
    np.fill_diagonal(d2, np.inf)
    eps = float(d2.min(axis=0).max())
    if eps <= 0.0:
        raise DegenerateInputError("every point has an exact duplicate; kernel scale would be zero")
    return eps


def build_markov(Z, cfg: KernelConfig = KernelConfig(), epsilon: float | None = None) -> MarkovKernel:
    """Gaussian kernel, alpha-normalization and row normalization.

    ``epsilon`` overrides the heuristic scale; ``cfg.epsilon_factor``
    multiplies whichever base scale is used.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] < 2:
        raise ValueError("need at least two points")
    d2 = pairwise_sq_distances(Z)
    base = heuristic_epsilon(Z) if epsilon is None else float(epsilon)
    eps = base * cfg.epsilon_factor
    if not eps > 0:
        raise DegenerateInputError("kernel scale must be positive")
    W = np.exp(-d2 / (2.0 * eps))
    q = W.sum(axis=1) ** cfg.alpha
    W_alpha = W / np.outer(q, q)
    degrees = W_alpha.sum(axis=1)
    K = W_alpha / degrees[:, None]
    return MarkovKernel(matrix=K, degrees=degrees, epsilon=eps)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column made positive; argmax picks the lowest index on ties
    pivot = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[pivot, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _complement_basis(v0: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to unit vector ``v0``."""
    M = v0.size
    e1 = np.zeros(M)
    e1[0] = 1.0
    u = v0 - e1
    norm = np.linalg.norm(u)
    if norm < 1e-15:
        return np.eye(M)[:, 1:]
    u /= norm
    # Householder reflector swapping e1 and v0; its other columns span v0's complement
    H = np.eye(M) - 2.0 * np.outer(u, u)
    return H[:, 1:]


def eigensystem(K, degrees) -> Eigensystem:
    """Full spectrum of the Markov matrix via its symmetric conjugate.

    The trivial pair is fixed analytically (``S sqrt(d) = sqrt(d)``) and
    the rest of the spectrum comes from ``S`` restricted to the orthogonal
    complement, so a disconnected graph (eigenvalue 1 repeated) still
    yields a constant ``psi_0``.
    """
    K = np.asarray(K, dtype=np.float64)
    degrees = np.asarray(degrees, dtype=np.float64)
    root = np.sqrt(degrees)
    S = root[:, None] * K / root[None, :]
    S = 0.5 * (S + S.T)
    v0 = root / np.linalg.norm(root)
    residual = np.linalg.norm(S @ v0 - v0)
    if residual > 1e-6:
        raise ValueError(f"K is not a valid Markov matrix for these degrees (residual {residual:.3g} at eigenvalue 1)")
    Q = _complement_basis(v0)
    T = Q.T @ S @ Q
    try:
        lam_rest, U = eigh(0.5 * (T + T.T))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver failed: {exc}") from exc
    order = np.argsort(-lam_rest, kind="stable")
    lam = np.concatenate([[1.0], lam_rest[order]])
    V = np.column_stack([v0, _fix_signs(Q @ U[:, order])])
    total = degrees.sum()
    right = np.sqrt(total) * V / root[:, None]
    left = V * root[:, None] / np.sqrt(total)
    return Eigensystem(eigenvalues=lam, right=right, left=left)


def decompose(K, degrees, dim: int, epsilon: float = float("nan")) -> SpectralEmbedding:
    K = np.asarray(K)
    M = K.shape[0]
    if not 1 <= dim <= M - 1:
        raise ValueError(f"embedding dimension must be in [1, {M - 1}], got {dim}")
    es = eigensystem(K, degrees)
    lam =es.eigenvalues[1 : dim + 1].copy()
    psi = es.right[:, 1 : dim + 1].copy()
    stationary = es.left[:, 0] / es.left[:, 0].sum()
    return SpectralEmbedding(
        epsilon=float(epsilon),
        eigenvalues=lam,
        psi=psi,
        coordinates=psi * lam,
        stationary=stationary,
    )


def diffusion_map(Z, cfg: KernelConfig = KernelConfig(), dim: int | None = None) -> SpectralEmbedding:
    """Embed the rows of ``Z``; ``dim`` overrides ``cfg.dim``."""
    mk = build_markov(Z, cfg)
    return decompose(mk.matrix, mk.degrees, cfg.dim if dim is None else dim, epsilon=mk.epsilon)


def _check_index(n: int, *idx: int) -> None:
    for i in idx:
        if not 0 <= i < n:
            raise IndexError(f"point index {i} out of range for {n} points")


def diffusion_distance_direct(K, stationary, i: int, j: int) -> float:
    """Squared diffusion distance from the transition rows of ``i`` and ``j``,
    weighted by the inverse stationary distribution."""
    K = np.asarray(K)
    _check_index(K.shape[0], i, j)
    diff = K[i] - K[j]
    return float(np.sum(diff * diff / np.asarray(stationary)))


def diffusion_distance_spectral(emb: SpectralEmbedding, i: int, j: int) -> float:
    """Squared diffusion distance from the embedding coordinates.

    Exact only when ``emb`` holds the full spectrum (``dim = M - 1``);
    otherwise a lower bound.
    """
    _check_index(emb.coordinates.shape[0], i, j)
    diff = emb.coordinates[i] - emb.coordinates[j]
    return float(diff @ diff)


def write_embedding_csv(emb: SpectralEmbedding, scores: Sequence[float], out: str | TextIO | None = None) -> None:
    """CSV rows: ``feature_index, mean_score, coord_1 .. coord_d``."""
    header = ["feature_index", "mean_score"] + [f"coord_{l + 1}" for l in range(emb.dim)]
    fh = open(out, "w", newline="", encoding="utf-8") if isinstance(out, str) else (out or sys.stdout)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, row in enumerate(emb.coordinates):
            w.writerow([i, repr(float(scores[i]))] + [repr(float(v)) for v in row])
    finally:
        if isinstance(out, str):
            fh.close()
