"""Silhouette-guided instance-weighted k-means."""
from .core import Dataset, KsilConfig, Partition, RunResult, SilhouetteReport, validate_dataset
from .engine import auto_tune_p, init_partition, run_ksil
from .baselines import run_kmeans, run_weighted_kmeans, tune_neighborhood
from .silhouette import approx_silhouette_apr, approx_silhouette_aps, exact_silhouette

__version__ = "0.1.0"

__all__ = [
    "Dataset", "KsilConfig", "Partition", "RunResult", "SilhouetteReport",
    "validate_dataset", "run_ksil", "auto_tune_p", "init_partition", "run_kmeans",
    "run_weighted_kmeans", "tune_neighborhood", "exact_silhouette",
    "approx_silhouette_apr", "approx_silhouette_aps",
]
