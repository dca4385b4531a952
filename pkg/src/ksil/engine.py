"""Silhouette-guided instance-weighted k-means (K-Sil).

The refinement loop below is shared with the baselines; they differ only in
how instance weights are produced each iteration. Every run:

1. starts from a partition obtained with one k-means iteration,
2. scores the current partition (exact or approximate, optionally on a sample),
3. turns scores into weights and moves centroids to weighted means,
4. reassigns all points, repairs empty clusters,
5. keeps the partition with the highest observed objective,

until the mean centroid movement drops below ``tau`` or ``max_iter`` steps ran.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.spatial.distance import cdist

from .core import (
    SAMPLE_STREAM,
    Dataset,
    KsilConfig,
    Partition,
    RunResult,
    SilhouetteReport,
    TraceRecord,
    WeightVector,
    make_rng,
)
from .errors import IrreparablePartition, KTooLarge, KTooSmall, ZeroClusterWeight
from .silhouette import exact_silhouette, sample_indices, silhouette
from .weighting import silhouette_weights

log = logging.getLogger(__name__)


def assign_labels(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest centroid per point; ties go to the lowest cluster index."""
    return np.argmin(cdist(points, centroids, "sqeuclidean"), axis=1).astype(np.intp)


def _kmeanspp_seeds(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = cdist(points, points[chosen], "sqeuclidean")[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # every point coincides with a seed already
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
        d2 = np.minimum(d2, cdist(points, points[[nxt]], "sqeuclidean")[:, 0])
    return np.array(chosen)


def _check_k(k: int, n: int) -> None:
    if k < 2:
        raise KTooSmall(f"k must be >= 2, got {k}")
    if k >= n:
        raise KTooLarge(f"k must be < n ({n}), got {k}")


def init_partition(data: Dataset, k: int, method: str = "kmeanspp",
                   rng: Optional[np.random.Generator] = None) -> Partition:
    """Seed k centroids and run one k-means iteration.

    Seeds are distinct points drawn uniformly (``random``) or by D^2 sampling
    (``kmeanspp``). Points are assigned to the nearest seed, centroids move to
    the cluster means, and points are reassigned to those means so the labels
    agree with the returned centroids.
    """
    _check_k(k, data.n)
    rng = rng if rng is not None else np.random.default_rng(0)
    X = data.points
    if method == "random":
        seeds = rng.choice(data.n, size=k, replace=False)
    elif method == "kmeanspp":
        seeds = _kmeanspp_seeds(X, k, rng)
    else:
        raise ValueError(f"unknown init method {method!r}")
    part = Partition(assign_labels(X, X[seeds]), X[seeds])
    part = reinit_empty(data, part)
    means = weighted_centroid_update(data, part, np.ones(data.n), np.arange(data.n))
    part = Partition(assign_labels(X, means), means)
    return reinit_empty(data, part)


def weighted_centroid_update(data: Dataset, part: Partition, weights, indices=None) -> np.ndarray:
    """Weighted mean of each cluster's scored points.

    ``weights`` align with ``indices`` (default: all points); points outside
    ``indices`` do not contribute.
    """
    X = data.points
    idx = np.arange(data.n) if indices is None else np.asarray(indices, dtype=np.intp)
    w = np.asarray(weights, dtype=np.float64)
    lab = part.assignments[idx]
    k = part.k
    total = np.bincount(lab, weights=w, minlength=k)
    if not (total > 0).all():
        bad = np.flatnonzero(~(total > 0)).tolist()
        raise ZeroClusterWeight(f"clusters {bad} have no positive weight")
    pts = X[idx]
    sums = np.column_stack([np.bincount(lab, weights=w * pts[:, c], minlength=k)
                            for c in range(X.shape[1])])
    return sums / total[:, None]


def reinit_empty(data: Dataset, part: Partition, strategy: str = "largest") -> Partition:
    """Give every empty cluster a point taken from a donor cluster.

    The donor is the largest cluster (``largest``) or the one with the highest
    mean squared deviation from its centroid (``variance``), ties to the lowest
    index. Its member farthest from the donor centroid becomes both the new
    centroid and the sole member of the empty cluster.
    """
    labels = part.assignments.copy()
    k = part.k
    sizes = np.bincount(labels, minlength=k)
    if (sizes > 0).all():
        return part
    if k > data.n:
        raise IrreparablePartition(f"cannot fill {k} clusters from {data.n} points")
    X = data.points
    centroids = part.centroids.copy()
    for j in np.flatnonzero(sizes == 0):
        eligible = sizes >= 2
        if not eligible.any():
            raise IrreparablePartition("no cluster has a point to spare")
        if strategy == "largest":
            score = sizes.astype(np.float64)
        elif strategy == "variance":
            resid = X - centroids[labels]
            sq = np.bincount(labels, weights=np.einsum("ij,ij->i", resid, resid), minlength=k)
            score = np.divide(sq, sizes, out=np.zeros(k), where=sizes > 0)
        else:
            raise ValueError(f"unknown reinit strategy {strategy!r}")
        score = np.where(eligible, score, -np.inf)
        donor = int(np.argmax(score))
        members = np.flatnonzero(labels == donor)
        far = members[int(np.argmax(np.linalg.norm(X[members] - centroids[donor], axis=1)))]
        centroids[j] = X[far]
        labels[far] = j
        sizes[donor] -= 1
        sizes[j] += 1
    return Partition(labels, centroids)


def compute_objective_f(weights, scores) -> float:
    """Weighted silhouette sum. Diagnostic only."""
    return float(np.dot(np.asarray(weights, dtype=np.float64), np.asarray(scores, dtype=np.float64)))


@dataclass(frozen=True, eq=False)
class CorePeripherySplit:
    """Per-cluster median score and the core mask over evaluated points.

    ``core[r]`` is True when ``scores[r]`` strictly exceeds the median of its
    cluster; every other evaluated point is periphery.
    """

    medians: np.ndarray
    indices: np.ndarray
    core: np.ndarray

    def core_indices(self, j: Optional[int] = None, labels=None) -> np.ndarray:
        sel = self.core
        if j is not None:
            sel = sel & (np.asarray(labels)[self.indices] == j)
        return self.indices[sel]

    def periphery_indices(self, j: Optional[int] = None, labels=None) -> np.ndarray:
        sel = ~self.core
        if j is not None:
            sel = sel & (np.asarray(labels)[self.indices] == j)
        return self.indices[sel]


def core_periphery_split(labels, scores, indices=None) -> CorePeripherySplit:
    labels = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    idx = np.arange(labels.size) if indices is None else np.asarray(indices, dtype=np.intp)
    lab = labels[idx]
    k = int(labels.max()) + 1
    medians = np.full(k, np.nan)
    core = np.zeros(idx.size, dtype=bool)
    for j in range(k):
        sel = lab == j
        if sel.any():
            medians[j] = np.median(s[sel])
            core[sel] = s[sel] > medians[j]
    return CorePeripherySplit(medians, idx, core)


ScoreFn = Callable[[Partition], SilhouetteReport]
WeightFn = Callable[[Partition, SilhouetteReport], WeightVector]


def refine(data: Dataset, initial: Partition, score: ScoreFn, weigh: WeightFn, *,
           objective: str, tau: float, max_iter: int, reinit: str = "largest",
           mode: str = "exact", exact_report_cap: int = 5000,
           params: Optional[dict] = None) -> RunResult:
    """Weighted refinement loop with best-objective retention."""
    X = data.points
    part = initial
    movement = 0.0
    trace = []
    best_obj, best_part, best_idx = -np.inf, part, None
    t = 0
    while True:
        report = score(part)
        wv = weigh(part, report)
        s_t = report.objective(objective)
        trace.append(TraceRecord(t, s_t, compute_objective_f(wv.weights, report.per_point),
                                 movement, part.assignments, report.per_point,
                                 report.evaluated_indices))
        if s_t > best_obj:
            best_obj, best_part, best_idx = s_t, part, report.evaluated_indices
        if t > 0 and movement < tau:
            stop = "threshold"
            break
        if t >= max_iter:
            stop = "max_iter"
            break
        centroids = weighted_centroid_update(data, part, wv.weights, wv.indices)
        nxt = reinit_empty(data, Partition(assign_labels(X, centroids), centroids), reinit)
        movement = float(np.mean(np.linalg.norm(nxt.centroids - part.centroids, axis=1)))
        part = nxt
        t += 1
    exact = None
    if data.n <= exact_report_cap:
        exact = exact_silhouette(data, best_part, alpha=getattr(report, "alpha", 0.5))
    return RunResult(best_part, float(best_obj), len(trace), tuple(trace), stop, best_idx,
                     part, objective, mode, exact, dict(params or {}))


def run_ksil(data: Dataset, cfg: KsilConfig, initial: Optional[Partition] = None) -> RunResult:
    """One K-Sil run. With ``cfg.auto_p`` the sensitivity is grid-searched first."""
    cfg.validate(data.n)
    if cfg.auto_p:
        return auto_tune_p(data, cfg, initial)[1]
    if initial is None:
        initial = init_partition(data, cfg.k, cfg.init, make_rng(cfg.seed))
    mode = "apr" if cfg.approximate else "exact"
    sampling = cfg.sample_size is not None and cfg.sample_size < data.n
    rng = make_rng(cfg.seed, SAMPLE_STREAM)

    def score(part: Partition) -> SilhouetteReport:
        idx = sample_indices(part, cfg.sample_size, cfg.objective, rng) if sampling else None
        return silhouette(data, part, idx, mode, cfg.alpha)

    def weigh(part: Partition, report: SilhouetteReport) -> WeightVector:
        return silhouette_weights(part.assignments, report.evaluated_indices,
                                  report.per_point, cfg.scheme, cfg.p, cfg.eps)

    params = {"algo": "ksil", "k": cfg.k, "scheme": cfg.scheme, "p": float(cfg.p),
              "objective": cfg.objective, "approximate": cfg.approximate,
              "sample_size": cfg.sample_size, "seed": cfg.seed}
    return refine(data, initial, score, weigh, objective=cfg.objective, tau=cfg.tau,
                  max_iter=cfg.max_iter, reinit=cfg.reinit, mode=mode,
                  exact_report_cap=cfg.exact_report_cap, params=params)


def auto_tune_p(data: Dataset, cfg: KsilConfig, initial: Optional[Partition] = None,
                n_jobs: int = 1):
    """Run K-Sil once per candidate sensitivity and keep the best objective.

    All candidates start from the same initial partition and sampling stream.
    Ties go to the smaller p. Returns ``(best_p, RunResult)``.
    """
    cfg.validate(data.n)
    if initial is None:
        initial = init_partition(data, cfg.k, cfg.init, make_rng(cfg.seed))
    grid = sorted(float(p) for p in cfg.p_grid)
    fixed = [replace(cfg, p=p, auto_p=False) for p in grid]

    def one(c: KsilConfig) -> RunResult:
        return run_ksil(data, c, initial)

    if n_jobs > 1:
        if not cfg.approximate:
            data.distances  # build the shared cache once, before threads race for it
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(one, fixed))
    else:
        results = [one(c) for c in fixed]
    best = 0
    for i, r in enumerate(results):
        if r.best_objective > results[best].best_objective:
            best = i
    curve = [[p, r.best_objective] for p, r in zip(grid, results)]
    chosen = results[best]
    log.debug("auto-tuned p=%s over %s", grid[best], curve)
    chosen = replace(chosen, params={**chosen.params, "auto_p": True, "p_curve": curve})
    return grid[best], chosen
