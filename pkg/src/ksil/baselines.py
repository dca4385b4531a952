"""Comparison algorithms: k-means and two statically weighted k-means variants.

All three run through :func:`ksil.engine.refine` with fixed instance weights,
so they share initialization, tie-breaking, empty-cluster repair, termination
and best-objective retention with K-Sil. Retention scores every visited
partition with the exact silhouette objective.

LOF weights are ``1 / max(LOF, 1)``: inliers keep weight 1 and outliers are
down-weighted. They are never pushed above 1.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, Partition, RunResult, SilhouetteReport, WeightVector, make_rng
from .engine import _check_k, init_partition, refine
from .silhouette import exact_silhouette

DEFAULT_EPS = 1e-8
DEFAULT_H_GRID = (3, 5, 10, 15, 20, 30)
NMI_H = {"lof": 5, "density": 10}


def _knn(data: Dataset, h: int):
    """Distances to and indices of the h nearest neighbours, self excluded."""
    if not 1 <= h < data.n:
        raise ValueError(f"neighbour count h must satisfy 1 <= h < n ({data.n}), got {h}")
    dist, order = data.neighbor_order
    return dist[:, :h], order[:, :h]


def density_weights(data: Dataset, h: int, eps: float = DEFAULT_EPS) -> WeightVector:
    """Inverse of the mean distance to the h nearest neighbours (plus eps)."""
    dist, _ = _knn(data, h)
    w = 1.0 / (dist.mean(axis=1) + eps)
    return WeightVector(w, np.arange(data.n), "density", float(h))


def local_outlier_factor(data: Dataset, h: int, eps: float = DEFAULT_EPS) -> np.ndarray:
    """LOF with exactly h neighbours per point.

    ``eps`` is added to the mean reachability distance so duplicated points
    give a large but finite density.
    """
    dist, nbrs = _knn(data, h)
    kdist = dist[:, -1]
    reach = np.maximum(dist, kdist[nbrs])
    lrd = 1.0 / (reach.mean(axis=1) + eps)
    return lrd[nbrs].mean(axis=1) / lrd


def lof_weights(data: Dataset, h: int, eps: float = DEFAULT_EPS) -> WeightVector:
    lof = local_outlier_factor(data, h, eps)
    return WeightVector(1.0 / np.maximum(lof, 1.0), np.arange(data.n), "lof", float(h))


def run_weighted_kmeans(data: Dataset, k: int, weights, *, init: str = "kmeanspp",
                        tau: float = 1e-4, max_iter: int = 100, seed: int = 0,
                        objective: str = "macro", alpha: float = 0.5,
                        initial: Optional[Partition] = None, reinit: str = "largest",
                        algo: str = "weighted") -> RunResult:
    """Lloyd iterations with fixed per-point weights in the centroid update."""
    _check_k(k, data.n)
    w = np.asarray(weights.weights if isinstance(weights, WeightVector) else weights,
                   dtype=np.float64)
    if w.shape != (data.n,) or not np.isfinite(w).all() or (w < 0).any():
        raise ValueError("weights must be n finite non-negative values")
    if initial is None:
        initial = init_partition(data, k, init, make_rng(seed))
    wv = WeightVector(w, np.arange(data.n), algo, 0.0)

    def score(part: Partition) -> SilhouetteReport:
        return exact_silhouette(data, part, alpha=alpha)

    params = {"algo": algo, "k": k, "objective": objective, "seed": seed}
    return refine(data, initial, score, lambda part, report: wv, objective=objective,
                  tau=tau, max_iter=max_iter, reinit=reinit, params=params)


def run_kmeans(data: Dataset, k: int, *, init: str = "kmeanspp", tau: float = 1e-4,
               max_iter: int = 100, seed: int = 0, objective: str = "macro",
               alpha: float = 0.5, initial: Optional[Partition] = None,
               reinit: str = "largest") -> RunResult:
    """Standard k-means through the shared loop (all weights 1)."""
    return run_weighted_kmeans(data, k, np.ones(data.n), init=init, tau=tau,
                               max_iter=max_iter, seed=seed, objective=objective,
                               alpha=alpha, initial=initial, reinit=reinit, algo="kmeans")


def neighborhood_weights(data: Dataset, algo: str, h: int, eps: float = DEFAULT_EPS) -> WeightVector:
    """Static weights of ``algo`` (``density`` or ``lof``), memoised per dataset."""
    if algo == "density":
        fn = density_weights
    elif algo == "lof":
        fn = lof_weights
    else:
        raise ValueError(f"unknown neighbourhood algorithm {algo!r}")
    return data.memo((algo, int(h), eps), lambda: fn(data, h, eps))


def tune_neighborhood(data: Dataset, k: int, algo: str, *, objective: str = "macro",
                      grid: Sequence[int] = DEFAULT_H_GRID, alpha: float = 0.5,
                      init: str = "kmeanspp", tau: float = 1e-4, max_iter: int = 100,
                      seed: int = 0, initial: Optional[Partition] = None):
    """Grid-search h for DensityKMeans or LOFKMeans on the exact objective.

    Candidates with h >= n are skipped. Ties go to the smaller h.
    Returns ``(best_h, RunResult)``.
    """
    hs = sorted(int(h) for h in grid if 1 <= int(h) < data.n)
    if not hs:
        raise ValueError(f"no usable neighbour count in {list(grid)} for n={data.n}")
    if initial is None:
        initial = init_partition(data, k, init, make_rng(seed))
    best_h, best = None, None
    for h in hs:
        r = run_weighted_kmeans(data, k, neighborhood_weights(data, algo, h), tau=tau,
                                max_iter=max_iter, seed=seed, objective=objective,
                                alpha=alpha, initial=initial, algo=algo)
        if best is None or r.best_objective > best.best_objective:
            best_h, best = h, r
    return best_h, replace(best, params={**best.params, "h": best_h})
