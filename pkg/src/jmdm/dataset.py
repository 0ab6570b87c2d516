"""Labeled tabular data: CSV loading, stratified folds and z-scoring."""

from __future__ import annotations

import csv
import gzip
import io
import json
import math
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Sequence

import numpy as np

#: standard deviations below this are treated as zero (feature is constant)
STD_FLOOR = 1e-12


class DataError(ValueError):
    """Raised when input data violates the loader's assumptions."""


@dataclass(frozen=True)
class LabeledDataset:
    """An ``N x M`` feature matrix with one class label per row.

    ``labels`` keeps the original label values; ``y`` holds the contiguous
    class codes ``0..C-1`` assigned by sorted label order.
    """

    features: np.ndarray
    labels: np.ndarray
    classes: tuple
    y: np.ndarray
    name: str = ""
    feature_names: tuple = field(default=())

    def __post_init__(self):
        X = self.features
        if X.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        n, m = X.shape
        if n < 2:
            raise DataError(f"need at least 2 samples, got {n}")
        if m < 1:
            raise DataError("need at least one feature column")
        if len(self.classes) < 2:
            raise DataError(f"need at least 2 classes, got {len(self.classes)}")
        if self.y.shape != (n,) or self.labels.shape != (n,):
            raise DataError("labels must have one entry per row")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain non-finite values")
        present = np.bincount(self.y, minlength=len(self.classes))
        if np.any(present == 0):
            raise DataError("every class must appear at least once")
        X.setflags(write=False)
        self.y.setflags(write=False)

    @classmethod
    def from_arrays(cls, features, labels, name: str = "", feature_names=()) -> "LabeledDataset":
        X = np.array(features, dtype=np.float64, copy=True)
        if X.ndim == 1:
            X = X[:, None]
        labels = np.asarray(labels)
        classes, y = np.unique(labels, return_inverse=True)
        return cls(
            features=X,
            labels=labels,
            classes=tuple(classes.tolist()),
            y=y.astype(np.intp),
            name=name,
            feature_names=tuple(feature_names),
        )

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def class_index(self) -> dict:
        return {c: i for i, c in enumerate(self.classes)}

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)


def _open_text(path: Path, mode: str):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, mode + "b"), encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


def _parse_label(values: list[str]) -> np.ndarray:
    # numeric labels sort numerically ("2" < "10"); anything else sorts as text
    try:
        nums = [float(v) for v in values]
    except ValueError:
        return np.array(values, dtype=object).astype(str)
    if all(math.isfinite(v) and v == int(v) for v in nums):
        return np.array([int(v) for v in nums], dtype=np.int64)
    return np.array(nums, dtype=np.float64)


def load_csv(
    path: str | PathLike,
    label_column: str | int = -1,
    has_header: bool = True,
    delimiter: str = ",",
) -> LabeledDataset:
    """Load a labeled dataset from a CSV file (``.csv`` or ``.csv.gz``).

    Parameters
    ----------
    path : path-like
        File to read. UTF-8, one sample per row.
    label_column : str or int
        Header name of the label column, or its zero-based index
        (negative indices count from the end).
    has_header : bool
        Whether the first row holds column names.
    delimiter : str
        Field separator.

    Returns
    -------
    LabeledDataset
        Feature columns keep their file order.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with _open_text(path, "r") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    header = None
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header, rows = [h.strip() for h in rows[0]], rows[1:]
    if not rows:
        raise DataError(f"{path}: no data rows")

    width = len(header) if header is not None else len(rows[0])
    if isinstance(label_column, str):
        if header is None:
            raise DataError("selecting the label column by name requires a header row")
        if label_column not in header:
            raise DataError(f"label column {label_column!r} not in header")
        lab = header.index(label_column)
    else:
        lab = int(label_column)
        if not -width <= lab < width:
            raise DataError(f"label column index {lab} out of range for {width} columns")
        lab %= width

    feat_cols = [j for j in range(width) if j != lab]
    X = np.empty((len(rows), len(feat_cols)), dtype=np.float64)
    raw_labels = []
    first_line = 2 if has_header else 1
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"{path}: line {i + first_line} has {len(row)} fields, expected {width}")
        raw_labels.append(row[lab].strip())
        for out_j, j in enumerate(feat_cols):
            cell = row[j]
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                raise DataError(
                    f"{path}: line {i + first_line}, column {j}: cannot parse {cell!r} as a finite number"
                )
            X[i, out_j] = v

    names = tuple(header[j] for j in feat_cols) if header is not None else ()
    stem = path.name.split(".")[0]
    return LabeledDataset.from_arrays(X, _parse_label(raw_labels), name=stem, feature_names=names)


def write_csv(ds: LabeledDataset, path: str | PathLike, label_name: str = "label") -> None:
    """Write ``ds`` as CSV with the label in the last column.

    Floats are written with ``repr`` so reloading is bit-exact.
    """
    path = Path(path)
    names = ds.feature_names or tuple(f"f{j}" for j in range(ds.n_features))
    with _open_text(path, "w") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*names, label_name])
        for row, lab in zip(ds.features, ds.labels):
            w.writerow([repr(float(v)) for v in row] + [str(lab)])


@dataclass(frozen=True)
class FoldPlan:
    fold_count: int
    assignments: np.ndarray
    seed: int

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def to_json(self) -> str:
        return json.dumps(
            {
                "fold_count": self.fold_count,
                "seed": self.seed,
                "assignments": self.assignments.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "FoldPlan":
        d = json.loads(text)
        return cls(int(d["fold_count"]), np.asarray(d["assignments"], dtype=np.intp), int(d["seed"]))


def make_folds(ds: LabeledDataset, fold_count: int, seed: int) -> FoldPlan:
    """Stratified assignment of rows to ``fold_count`` folds.

    Rows of each class are shuffled and dealt round-robin; the dealing
    position carries over between classes so overall fold sizes stay even.
    """
    if fold_count < 1:
        raise ValueError("fold_count must be positive")
    smallest = int(ds.class_counts.min())
    if fold_count > smallest:
        raise ValueError(f"fold_count={fold_count} exceeds the smallest class size ({smallest})")
    rng = np.random.default_rng(seed)
    assignments = np.empty(ds.n_samples, dtype=np.intp)
    offset = 0
    for c in range(ds.n_classes):
        members = rng.permutation(np.flatnonzero(ds.y == c))
        assignments[members] = (offset + np.arange(members.size)) % fold_count
        offset = (offset + members.size) % fold_count
    assignments.setflags(write=False)
    return FoldPlan(fold_count=fold_count, assignments=assignments, seed=int(seed))


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale


def fit_standardizer(ds: LabeledDataset | np.ndarray, train_rows: Sequence[int] | None = None) -> Standardizer:
    """Per-feature mean and population std of the training rows.

    Constant features get unit scale, so they transform to zeros.
    """
    X = ds.features if isinstance(ds, LabeledDataset) else np.asarray(ds, dtype=np.float64)
    if train_rows is not None:
        X = X[np.asarray(train_rows, dtype=np.intp)]
    if X.shape[0] == 0:
        raise ValueError("cannot fit a standardizer on an empty row set")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std < STD_FLOOR, 1.0, std)
    return Standardizer(mean=mean, scale=std)


def apply_standardizer(s: Standardizer, rows) -> np.ndarray:
    return s.transform(rows)
