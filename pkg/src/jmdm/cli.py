"""Command-line front end: ``jmdm select | embed | benchmark``.

Exit codes: 0 success, 1 data or numerical error, 2 usage error.
Data goes to stdout (or ``--out``); diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from .dataset import DataError, LabeledDataset, fit_standardizer, load_csv
from .evaluation import METHOD_CODES, EvalConfig, fraction_to_count, parse_fraction, run_benchmark
from .selection import SelectionConfig, SelectionError, select_jmdm, select_random, select_top_ranked
from .separability import compute_class_stats, compute_jm_profiles, fisher_scores, mean_scores, profile_matrix
from .spectral import DegenerateInputError, KernelConfig, diffusion_map, write_embedding_csv

METHODS = sorted(METHOD_CODES)


class UsageError(Exception):
    pass


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def _fraction(text):
    try:
        return parse_fraction(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _label_col(text):
    try:
        return int(text)
    except ValueError:
        return text


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV (or .csv.gz) with one sample per row")
    p.add_argument("--label-col", type=_label_col, default=-1, help="label column name or zero-based index (default: last)")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true", help="first row is data, not column names")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--threads", type=_positive_int, help="worker cap (default: all available)")


def _add_kernel_args(p):
    p.add_argument("--dim", type=_positive_int, default=3, help="diffusion-maps coordinates (default 3)")
    p.add_argument("--alpha", type=float, default=1.0, help="density normalization exponent in [0,1] (default 1)")
    p.add_argument("--epsilon-factor", type=float, default=1.0, help="multiplier on the kernel-scale heuristic")


def _add_selection_args(p):
    p.add_argument("--q", type=float, default=0.25, help="quantile of low mean-JM features to drop (default 0.25)")
    p.add_argument("--restarts", type=_positive_int, default=10, help="k-means restarts (default 10)")
    p.add_argument("--seed", type=int, help="random seed (falls back to $JMDM_SEED, then 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jmdm", description="JM-DM filter feature selection")
    sub = parser.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", help="select features and print them as JSON")
    _add_data_args(sel)
    sel.add_argument("--method", default="jmdm", choices=METHODS)
    size = sel.add_mutually_exclusive_group(required=True)
    size.add_argument("--k", type=_positive_int, help="number of features to select")
    size.add_argument("--fraction", type=_fraction, help="fraction of features to select, e.g. 1/32")
    _add_kernel_args(sel)
    _add_selection_args(sel)

    emb = sub.add_parser("embed", help="write the diffusion-maps embedding of the features as CSV")
    _add_data_args(emb)
    _add_kernel_args(emb)

    bench = sub.add_parser("benchmark", help="cross-validated KNN accuracy per method and fraction")
    _add_data_args(bench)
    bench.add_argument("--methods", default=",".join(METHODS), help=f"comma-separated subset of {METHODS}")
    bench.add_argument("--fractions", default="1/8,1/16,1/32")
    bench.add_argument("--folds", type=_positive_int, default=5)
    bench.add_argument("--knn-k", type=_positive_int, default=5)
    _add_kernel_args(bench)
    _add_selection_args(bench)
    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("JMDM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"JMDM_SEED must be an integer, got {env!r}")


def _kernel_cfg(args) -> KernelConfig:
    try:
        return KernelConfig(epsilon_factor=args.epsilon_factor, alpha=args.alpha, dim=args.dim)
    except ValueError as exc:
        raise UsageError(str(exc))


def _load(args) -> LabeledDataset:
    return load_csv(args.data, args.label_col, has_header=not args.no_header, delimiter=args.delimiter)


def _standardized(ds: LabeledDataset) -> LabeledDataset:
    X = fit_standardizer(ds).transform(ds.features)
    return LabeledDataset(features=X, labels=ds.labels, classes=ds.classes, y=ds.y, name=ds.name)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_select(args) -> None:
    if not 0.0 <= args.q < 1.0:
        raise UsageError("--q must lie in [0, 1)")
    kernel_cfg = _kernel_cfg(args)
    seed = _resolve_seed(args)
    ds = _load(args)
    k_star = args.k if args.k is not None else fraction_to_count(ds.n_features, args.fraction)
    if k_star > ds.n_features:
        raise UsageError(f"--k {k_star} exceeds the feature count {ds.n_features}")

    if args.method == "random":
        result = select_random(ds.n_features, k_star, seed)
    else:
        stats = compute_class_stats(_standardized(ds))
        if args.method == "fisher":
            result = select_top_ranked(fisher_scores(stats), k_star, method="fisher")
        else:
            profiles = compute_jm_profiles(stats)
            cfg = SelectionConfig(k_star=k_star, q=args.q, kmeans_seed=seed, kmeans_restarts=args.restarts)
            try:
                emb = diffusion_map(profile_matrix(profiles), kernel_cfg)
            except DegenerateInputError as exc:
                emb_error, emb = exc, None
            try:
                result = select_jmdm(profiles, emb, cfg)
            except SelectionError as exc:
                if emb is None:
                    raise SelectionError(f"{exc} ({emb_error})") from None
                raise

    doc = result.to_dict()
    doc["config"] = {
        "data": os.path.basename(args.data),
        "label_col": args.label_col,
        "k_star": k_star,
        "fraction": str(args.fraction) if args.fraction is not None else None,
        "q": args.q,
        "seed": seed,
        "restarts": args.restarts,
        "kernel": asdict(kernel_cfg),
    }
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)


def cmd_embed(args) -> None:
    kernel_cfg = _kernel_cfg(args)
    ds = _load(args)
    if kernel_cfg.dim > ds.n_features - 1:
        raise UsageError(f"--dim must be at most {ds.n_features - 1} for {ds.n_features} features")
    profiles = compute_jm_profiles(compute_class_stats(_standardized(ds)))
    emb = diffusion_map(profile_matrix(profiles), kernel_cfg)
    buf = io.StringIO()
    buf.write(
        "# "
        + json.dumps({"data": os.path.basename(args.data), "epsilon": emb.epsilon, "kernel": asdict(kernel_cfg)}, sort_keys=True)
        + "\n"
    )
    write_embedding_csv(emb, mean_scores(profiles), buf)
    _emit(buf.getvalue(), args.out)


def cmd_benchmark(args) -> None:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    unknown = [m for m in methods if m not in METHOD_CODES]
    if unknown or not methods:
        raise UsageError(f"unknown method(s) {unknown}; valid methods: {', '.join(METHODS)}")
    try:
        fractions = tuple(parse_fraction(f) for f in args.fractions.split(","))
    except ValueError as exc:
        raise UsageError(f"--fractions: {exc}")
    if not 0.0 <= args.q < 1.0:
        raise UsageError("--q must lie in [0, 1)")
    kernel_cfg = _kernel_cfg(args)
    seed = _resolve_seed(args)
    try:
        cfg = EvalConfig(knn_k=args.knn_k, fold_count=args.folds, fractions=fractions, methods=methods, master_seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    sel_cfg = SelectionConfig(k_star=1, q=args.q, kmeans_restarts=args.restarts)

    ds = _load(args)
    report = run_benchmark(
        ds, cfg, sel_cfg, kernel_cfg, threads=args.threads, progress=lambda msg: print(msg, file=sys.stderr)
    )
    if args.out:
        text = report.to_csv() if args.out.endswith(".csv") else report.to_json()
        _emit(text, args.out)
    sys.stdout.write(report.format_table() + "\n")
    failed = [f"{m} {f}: {c.error}" for (m, f), c in report.cells.items() if c.error]
    for line in failed:
        print(f"jmdm: cell failed: {line}", file=sys.stderr)


COMMANDS = {"select": cmd_select, "embed": cmd_embed, "benchmark": cmd_benchmark}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (DataError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"jmdm: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
