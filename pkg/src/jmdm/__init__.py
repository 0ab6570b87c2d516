"""JM-DM feature selection.

Each feature is summarized by its matrix of pairwise-class
Jeffries-Matusita distances; diffusion maps embed those matrices, and
k-means in the embedding picks features with complementary separation.
"""

from .dataset import (
    DataError,
    FoldPlan,
    LabeledDataset,
    Standardizer,
    apply_standardizer,
    fit_standardizer,
    load_csv,
    make_folds,
    write_csv,
)
from .evaluation import (
    EvalConfig,
    EvalReport,
    fraction_to_count,
    knn_predict,
    parse_fraction,
    run_benchmark,
)
from .selection import (
    SelectionConfig,
    SelectionError,
    SelectionResult,
    kmeans,
    quantile_filter,
    select_jmdm,
    select_random,
    select_top_ranked,
)
from .separability import (
    ClassStats,
    JmProfile,
    bhattacharyya,
    compute_class_stats,
    compute_jm_profiles,
    fisher_scores,
    jm_from_b,
    mean_scores,
    profile_matrix,
)
from .spectral import (
    DegenerateInputError,
    KernelConfig,
    SpectralEmbedding,
    build_markov,
    decompose,
    diffusion_distance_direct,
    diffusion_distance_spectral,
    diffusion_map,
    heuristic_epsilon,
)

__version__ = "0.1.0"

__all__ = [
    "ClassStats",
    "DataError",
    "DegenerateInputError",
    "EvalConfig",
    "EvalReport",
    "FoldPlan",
    "JmProfile",
    "KernelConfig",
    "LabeledDataset",
    "SelectionConfig",
    "SelectionError",
    "SelectionResult",
    "SpectralEmbedding",
    "Standardizer",
    "apply_standardizer",
    "bhattacharyya",
    "build_markov",
    "compute_class_stats",
    "compute_jm_profiles",
    "decompose",
    "diffusion_distance_direct",
    "diffusion_distance_spectral",
    "diffusion_map",
    "fisher_scores",
    "fit_standardizer",
    "fraction_to_count",
    "heuristic_epsilon",
    "jm_from_b",
    "kmeans",
    "knn_predict",
    "load_csv",
    "make_folds",
    "mean_scores",
    "parse_fraction",
    "profile_matrix",
    "quantile_filter",
    "run_benchmark",
    "select_jmdm",
    "select_random",
    "select_top_ranked",
    "write_csv",
]
