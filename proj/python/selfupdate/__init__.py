"""Self-updating template galleries for distance-based verification."""

from ._selfupdate import (
    Gallery,
    SelfUpdateError,
    compute_eer,
    compute_roc,
    generate,
    kmeans,
    oracle_subset_select,
    run_experiment,
    select_dend,
    select_mdist,
    storage_capped,
    storage_uncapped,
)

__all__ = [
    "Gallery",
    "SelfUpdateError",
    "compute_eer",
    "compute_roc",
    "generate",
    "kmeans",
    "oracle_subset_select",
    "run_experiment",
    "select_dend",
    "select_mdist",
    "storage_capped",
    "storage_uncapped",
]
