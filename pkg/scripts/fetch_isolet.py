"""Build data/isolet.csv.gz (UCI Isolet, 7797 x 617 + letter label 1..26).

Fetches OpenML dataset 300 through scikit-learn (network access and
scikit-learn required; neither is a library dependency).

    python scripts/fetch_isolet.py [--out data/isolet.csv.gz]
"""

import argparse
import csv
import gzip
import io
from pathlib import Path

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/isolet.csv.gz")
    args = ap.parse_args()

    from sklearn.datasets import fetch_openml

    bunch = fetch_openml(data_id=300, as_frame=False, parser="liac-arff")
    X = np.asarray(bunch.data, dtype=np.float64)
    y = [int(float(v)) for v in bunch.target]
    assert X.shape == (7797, 617), X.shape

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with gzip.GzipFile(out, "wb", mtime=0) as gz, io.TextIOWrapper(gz, encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{j}" for j in range(X.shape[1])] + ["class"])
        for row, lab in zip(X, y):
            w.writerow([repr(float(v)) for v in row] + [lab])
    print(f"wrote {out}: {X.shape[0]} rows, {X.shape[1]} features, {len(set(y))} classes")


if __name__ == "__main__":
    main()
