"""Build data/mfeat.csv.gz (UCI Multiple Features, 2000 x 649 + digit label).

The six UCI views ship inside the ``mvlearn`` wheel on PyPI; this script
downloads that wheel with pip (no install) and concatenates the views in
the UCI column order: fou, fac, kar, pix, zer, mor.

    python scripts/fetch_mfeat.py [--wheel path/to/mvlearn.whl] [--out data/mfeat.csv.gz]
"""

import argparse
import csv
import glob
import gzip
import io
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

import numpy as np

VIEWS = ["fou", "fac", "kar", "pix", "zer", "mor"]


def fetch_wheel(dest: str) -> str:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-d", dest, "mvlearn==0.5.0"],
        check=True,
    )
    return glob.glob(f"{dest}/mvlearn-*.whl")[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--wheel")
    ap.add_argument("--out", default="data/mfeat.csv.gz")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or fetch_wheel(tmp)
        blocks, labels = [], None
        with zipfile.ZipFile(wheel) as zf:
            for v in VIEWS:
                raw = zf.read(f"mvlearn/datasets/UCImultifeature/mfeat-{v}.csv").decode()
                arr = np.loadtxt(io.StringIO(raw), delimiter=",", skiprows=1)
                blocks.append(arr[:, :-1])
                lab = arr[:, -1].astype(int)
                if labels is not None and not np.array_equal(lab, labels):
                    raise SystemExit(f"label column of mfeat-{v} disagrees with the others")
                labels = lab
    X = np.hstack(blocks)
    names = [f"{v}_{j}" for v, b in zip(VIEWS, blocks) for j in range(b.shape[1])]
    assert X.shape == (2000, 649), X.shape

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    # mtime=0 keeps the archive byte-reproducible
    with gzip.GzipFile(out, "wb", mtime=0) as gz, io.TextIOWrapper(gz, encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["digit"])
        for row, lab in zip(X, labels):
            w.writerow([repr(float(v)) for v in row] + [int(lab)])
    print(f"wrote {out}: {X.shape[0]} rows, {X.shape[1]} features, {len(set(labels))} classes")


if __name__ == "__main__":
    main()
