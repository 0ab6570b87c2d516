"""Cross-validated KNN benchmark of the selection methods."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import LabeledDataset, fit_standardizer, make_folds
from .separability import compute_class_stats, compute_jm_profiles, fisher_scores, profile_matrix
from .selection import SelectionConfig, SelectionError, select_jmdm, select_random, select_top_ranked
from .spectral import DegenerateInputError, KernelConfig, diffusion_map

#: fixed method codes; seeds depend on these, not on the order methods are requested in
METHOD_CODES = {"jmdm": 0, "fisher": 1, "random": 2}
DEFAULT_FRACTIONS = (Fraction(1, 8), Fraction(1, 16), Fraction(1, 32))


def parse_fraction(text: str | float | Fraction) -> Fraction:
    """Parse ``"1/8"``, ``"0.125"`` or a number into a Fraction."""
    if isinstance(text, Fraction):
        f = text
    elif isinstance(text, str):
        try:
            f = Fraction(text.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a fraction: {text!r}") from exc
    else:
        f = Fraction(text).limit_denominator(10**9)
    if not 0 < f <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {f}")
    return f


def fraction_to_count(n_features: int, fraction) -> int:
    """``round(M * fraction)`` (halves round up), at least 1."""
    exact = n_features * parse_fraction(fraction)
    return max(1, math.floor(exact + Fraction(1, 2)))


def knn_predict(train_X, train_y, test_X, k: int = 5) -> np.ndarray:
    """Majority vote of the ``k`` nearest training rows (Euclidean).

    Equidistant neighbours are ranked by training-row index; a tied vote
    goes to the tied class whose member is nearest.
    """
    train_X = np.asarray(train_X, dtype=np.float64)
    test_X = np.asarray(test_X, dtype=np.float64)
    train_y = np.asarray(train_y)
    if train_X.ndim != 2 or test_X.ndim != 2:
        raise ValueError("train_X and test_X must be 2-D")
    if train_X.shape[0] == 0:
        raise ValueError("empty training set")
    if train_X.shape[1] != test_X.shape[1]:
        raise ValueError(f"dimension mismatch: train has {train_X.shape[1]} columns, test {test_X.shape[1]}")
    if not 1 <= k <= train_X.shape[0]:
        raise ValueError(f"k must be in [1, {train_X.shape[0]}], got {k}")
    classes, codes = np.unique(train_y, return_inverse=True)
    if test_X.shape[0] == 0:
        return classes[:0]
    d = cdist(test_X, train_X, "sqeuclidean")
    nn = np.argsort(d, axis=1, kind="stable")[:, :k]
    votes = codes[nn]
    counts = np.zeros((test_X.shape[0], classes.size), dtype=np.intp)
    np.add.at(counts, (np.arange(test_X.shape[0])[:, None], votes), 1)
    tied = counts == counts.max(axis=1, keepdims=True)
    first = np.argmax(tied[np.arange(test_X.shape[0])[:, None], votes], axis=1)
    return classes[votes[np.arange(test_X.shape[0]), first]]


@dataclass(frozen=True)
class EvalConfig:
    knn_k: int = 5
    fold_count: int = 5
    fractions: tuple = DEFAULT_FRACTIONS
    methods: tuple = ("jmdm", "fisher", "random")
    master_seed: int = 0

    def __post_init__(self):
        if self.knn_k < 1:
            raise ValueError("knn_k must be positive")
        if self.fold_count < 2:
            raise ValueError("need at least 2 folds")
        object.__setattr__(self, "fractions", tuple(parse_fraction(f) for f in self.fractions))
        unknown = [m for m in self.methods if m not in METHOD_CODES]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; valid: {sorted(METHOD_CODES)}")


@dataclass
class Cell:
    method: str
    fraction: Fraction
    k_star: int
    accuracies: list[float] = field(default_factory=list)
    selections: list[list[int]] = field(default_factory=list)
    error: str | None = None

    @property
    def mean(self) -> float | None:
        if self.error is not None or not self.accuracies:
            return None
        return math.fsum(self.accuracies) / len(self.accuracies)


@dataclass
class EvalReport:
    cells: dict[tuple[str, Fraction], Cell]
    metadata: dict

    def mean_accuracy(self, method: str, fraction) -> float | None:
        return self.cells[(method, parse_fraction(fraction))].mean

    def to_dict(self) -> dict:
        cells = []
        for (method, frac), cell in sorted(self.cells.items(), key=lambda kv: (kv[0][0], -kv[0][1])):
            cells.append(
                {
                    "method": method,
                    "fraction": str(frac),
                    "k_star": cell.k_star,
                    "accuracies": cell.accuracies,
                    "mean_accuracy": cell.mean,
                    "selections": cell.selections,
                    "error": cell.error,
                }
            )
        return {"metadata": self.metadata, "cells": cells}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.metadata, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "fraction", "fold", "accuracy"])
        for (method, frac), cell in sorted(self.cells.items(), key=lambda kv: (kv[0][0], -kv[0][1])):
            for fold, acc in enumerate(cell.accuracies):
                w.writerow([method, str(frac), fold, repr(acc)])
        return buf.getvalue()

    def format_table(self) -> str:
        """Mean accuracies, one row per fraction and one column per method."""
        methods = list(self.metadata["config"]["methods"])
        fractions = [parse_fraction(f) for f in self.metadata["config"]["fractions"]]
        lines = ["Alg.  Fraction  " + "  ".join(f"{m:>8}" for m in methods)]
        for f in fractions:
            vals = []
            for m in methods:
                mean = self.cells[(m, f)].mean
                vals.append(f"{mean:8.3f}" if mean is not None else f"{'failed':>8}")
            lines.append(f"KNN   {str(f):>8}  " + "  ".join(vals))
        return "\n".join(lines)


def derive_seed(master_seed: int, *counters: int) -> int:
    """64-bit seed for one (fold, method, fraction) cell."""
    ss = np.random.SeedSequence([master_seed & (2**64 - 1), *counters])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_fold(
    ds: LabeledDataset,
    train_rows: np.ndarray,
    test_rows: np.ndarray,
    fold: int,
    cfg: EvalConfig,
    sel_cfg: SelectionConfig,
    kernel_cfg: KernelConfig,
) -> dict:
    """Score every (method, fraction) on one train/test split.

    Returns, per cell, a ``(SelectionResult, accuracy)`` pair or the
    exception the selection raised.
    """
    scaler = fit_standardizer(ds, train_rows)
    Xtr = scaler.transform(ds.features[train_rows])
    Xte = scaler.transform(ds.features[test_rows])
    ytr, yte = ds.y[train_rows], ds.y[test_rows]
    ds_train = LabeledDataset(
        features=Xtr, labels=ds.labels[train_rows], classes=ds.classes, y=ytr, name=ds.name
    )

    lazy: dict = {}

    def stats():
        if "stats" not in lazy:
            lazy["stats"] = compute_class_stats(ds_train)
        return lazy["stats"]

    def embedding():
        if "emb" not in lazy:
            profiles = compute_jm_profiles(stats())
            try:
                emb = diffusion_map(profile_matrix(profiles), kernel_cfg)
            except DegenerateInputError as exc:
                # only fatal for cells that actually need to cluster
                emb, lazy["emb_error"] = None, exc
            lazy["emb"] = (profiles, emb)
        return lazy["emb"]

    out = {}
    for method in cfg.methods:
        for fi, frac in enumerate(cfg.fractions):
            k_star = fraction_to_count(ds.n_features, frac)
            seed = derive_seed(cfg.master_seed, fold, METHOD_CODES[method], fi)
            try:
                if method == "random":
                    sel = select_random(ds.n_features, k_star, seed)
                elif method == "fisher":
                    sel = select_top_ranked(fisher_scores(stats()), k_star, method="fisher")
                else:
                    profiles, emb = embedding()
                    try:
                        sel = select_jmdm(profiles, emb, replace(sel_cfg, k_star=k_star, kmeans_seed=seed))
                    except SelectionError as exc:
                        if emb is None:
                            raise SelectionError(f"{exc} ({lazy['emb_error']})") from None
                        raise
            except (ValueError, np.linalg.LinAlgError) as exc:
                out[(method, frac)] = exc
                continue
            cols = list(sel.selected)
            pred = knn_predict(Xtr[:, cols], ytr, Xte[:, cols], cfg.knn_k)
            out[(method, frac)] = (sel, float(np.mean(pred == yte)))
    return out


def run_benchmark(
    ds: LabeledDataset,
    cfg: EvalConfig = EvalConfig(),
    sel_cfg: SelectionConfig = SelectionConfig(k_star=1),
    kernel_cfg: KernelConfig = KernelConfig(),
    threads: int | None = 1,
    progress: Callable[[str], None] | None = None,
) -> EvalReport:
    """Stratified CV: standardize, score, select and classify inside each fold.

    ``sel_cfg.k_star`` and ``sel_cfg.kmeans_seed`` are overridden per cell
    (from the fraction and the derived seed); its other fields apply.
    Test rows never reach the standardizer, the JM statistics, the
    embedding or the selection.
    """
    plan = make_folds(ds, cfg.fold_count, cfg.master_seed)

    def job(fold):
        res = run_fold(ds, plan.train_rows(fold), plan.test_rows(fold), fold, cfg, sel_cfg, kernel_cfg)
        if progress:
            progress(f"fold {fold + 1}/{cfg.fold_count} done")
        return res

    if threads == 1:
        per_fold = [job(f) for f in range(cfg.fold_count)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_fold = list(pool.map(job, range(cfg.fold_count)))

    cells = {}
    for method in cfg.methods:
        for frac in cfg.fractions:
            cell = Cell(method=method, fraction=frac, k_star=fraction_to_count(ds.n_features, frac))
            for fold, res in enumerate(per_fold):
                r = res[(method, frac)]
                if isinstance(r, Exception):
                    cell.error = f"fold {fold}: {r}"
                    cell.accuracies, cell.selections = [], []
                    break
                sel, acc = r
                cell.accuracies.append(acc)
                cell.selections.append(list(sel.selected))
            cells[(method, frac)] = cell

    metadata = {
        "dataset": {"name": ds.name, "n_samples": ds.n_samples, "n_features": ds.n_features, "n_classes": ds.n_classes},
        "config": {
            "knn_k": cfg.knn_k,
            "fold_count": cfg.fold_count,
            "fractions": [str(f) for f in cfg.fractions],
            "methods": list(cfg.methods),
            "master_seed": cfg.master_seed,
        },
        "selection": {k: v for k, v in asdict(sel_cfg).items() if k not in ("k_star", "kmeans_seed")},
        "kernel": asdict(kernel_cfg),
        "seeds": {
            "fold_plan": cfg.master_seed,
            "cells": {
                f"{m}/{f}/fold{fold}": derive_seed(cfg.master_seed, fold, METHOD_CODES[m], fi)
                for m in cfg.methods
                for fi, f in enumerate(cfg.fractions)
                for fold in range(cfg.fold_count)
            },
        },
    }
    return EvalReport(cells=cells, metadata=metadata)
