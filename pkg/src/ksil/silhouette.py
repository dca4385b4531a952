"""Exact and approximate silhouette scores, aggregation and objective-aware sampling.

Three per-point estimators share one output type, :class:`SilhouetteReport`:

``exact``
    Mean intra/inter-cluster Euclidean distances, O(n) per scored point.
``apr``
    Refined approximation from cluster sizes, centroids and within-cluster
    sums of squares; O(k) per scored point.
``aps``
    Plain centroid-distance proxy. Only used as a comparison baseline.

Points in singleton clusters score 0 under every estimator.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .core import Dataset, Partition, SilhouetteReport
from .errors import EmptyIndexSet, SampleTooSmall, SingleCluster

# Row block size for exact scoring without a cached distance matrix.
_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class ClusterStats:
    sizes: np.ndarray
    centroids: np.ndarray
    ss: np.ndarray


def cluster_stats(points: np.ndarray, labels: np.ndarray, k: int) -> ClusterStats:
    """Sizes, mean centroids and within-cluster sums of squares."""
    sizes = np.bincount(labels, minlength=k)
    sums = np.zeros((k, points.shape[1]))
    np.add.at(sums, labels, points)
    with np.errstate(invalid="ignore", divide="ignore"):
        centroids = sums / sizes[:, None]
    resid = points - centroids[labels]
    ss = np.bincount(labels, weights=np.einsum("ij,ij->i", resid, resid), minlength=k)
    return ClusterStats(sizes, centroids, ss)


def _indices(n: int, indices) -> np.ndarray:
    if indices is None:
        return np.arange(n)
    idx = np.asarray(indices, dtype=np.intp)
    if idx.size == 0:
        raise EmptyIndexSet("no points to evaluate")
    return idx


def _ratio(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    denom = np.maximum(a, b)
    out = np.zeros_like(a)
    np.divide(b - a, denom, out=out, where=denom > 0)
    return np.clip(out, -1.0, 1.0)


def aggregate(per_point, labels, evaluated, alpha: float = 0.5):
    """Return ``(S_m, S_M, combined)`` over the evaluated points.

    ``labels`` is the full assignment vector; ``evaluated`` indexes into it and
    aligns with ``per_point``. Clusters without an evaluated point are left
    out of the macro mean.
    """
    s = np.asarray(per_point, dtype=np.float64)
    idx = np.asarray(evaluated, dtype=np.intp)
    if idx.size == 0:
        raise EmptyIndexSet("no evaluated points to aggregate")
    lab = np.asarray(labels)[idx]
    micro = float(s.mean())
    k = int(lab.max()) + 1
    counts = np.bincount(lab, minlength=k)
    sums = np.bincount(lab, weights=s, minlength=k)
    present = counts > 0
    macro = float(np.mean(sums[present] / counts[present]))
    return micro, macro, alpha * micro + (1.0 - alpha) * macro


def _report(scores, part: Partition, idx, alpha, mode) -> SilhouetteReport:
    scores = np.asarray(scores, dtype=np.float64)
    micro, macro, combined = aggregate(scores, part.assignments, idx, alpha)
    scores.flags.writeable = False
    idx = np.array(idx, dtype=np.intp)
    idx.flags.writeable = False
    return SilhouetteReport(scores, idx, micro, macro, combined, mode, alpha)


def _require_two_clusters(part: Partition) -> None:
    if part.k < 2:
        raise SingleCluster(f"silhouette needs k >= 2 clusters, got {part.k}")


def cluster_distance_sums(data: Dataset, labels, k: int, idx, use_cache: bool = True) -> np.ndarray:
    """``out[r, j]`` = sum of distances from point ``idx[r]`` to members of cluster j."""
    onehot = np.zeros((data.n, k))
    onehot[np.arange(data.n), labels] = 1.0
    if use_cache:
        D = data.distances
        rows = D if idx.size == data.n and (idx == np.arange(data.n)).all() else D[idx]
        return rows @ onehot
    out = np.empty((idx.size, k))
    for start in range(0, idx.size, _CHUNK):
        block = idx[start:start + _CHUNK]
        out[start:start + block.size] = cdist(data.points[block], data.points) @ onehot
    return out


def exact_silhouette(data: Dataset, part: Partition, indices=None, alpha: float = 0.5,
                     use_cache: Optional[bool] = None) -> SilhouetteReport:
    """Exact silhouette scores of ``indices`` (default: all points).

    ``use_cache`` selects the dataset's cached full distance matrix; by default
    it is used whenever the matrix already exists or n <= 5000.
    """
    _require_two_clusters(part)
    idx = _indices(data.n, indices)
    labels = part.assignments
    k = part.k
    if use_cache is None:
        use_cache = "distances" in data.__dict__ or data.n <= 5000
    sums = cluster_distance_sums(data, labels, k, idx, use_cache)
    sizes = np.bincount(labels, minlength=k).astype(np.float64)
    own = labels[idx]
    rows = np.arange(idx.size)
    own_size = sizes[own]
    a = np.zeros(idx.size)
    np.divide(sums[rows, own], own_size - 1, out=a, where=own_size > 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        means = sums / sizes
    means[rows, own] = np.inf
    means[:, sizes == 0] = np.inf
    b = means.min(axis=1)
    s = _ratio(a, b)
    s[own_size <= 1] = 0.0
    return _report(s, part, idx, alpha, "exact")


def approx_silhouette_apr(data: Dataset, stats: Optional[ClusterStats], part: Partition,
                          indices=None, alpha: float = 0.5) -> SilhouetteReport:
    """Refined approximation built from sizes, centroids and SS of each cluster.

    ``stats`` defaults to the statistics of ``part``'s current assignments.
    """
    _require_two_clusters(part)
    idx = _indices(data.n, indices)
    if stats is None:
        stats = cluster_stats(data.points, part.assignments, part.k)
    own = part.assignments[idx]
    sizes = stats.sizes.astype(np.float64)
    d2 = cdist(data.points[idx], stats.centroids, "sqeuclidean")
    rows = np.arange(idx.size)
    own_size = sizes[own]
    a = np.zeros(idx.size)
    num = own_size * d2[rows, own] + stats.ss[own]
    np.divide(num, own_size - 1, out=a, where=own_size > 1)
    a = np.sqrt(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        spread = np.where(sizes > 0, stats.ss / sizes, np.inf)
    bb = d2 + spread
    bb[rows, own] = np.inf
    b = np.sqrt(bb.min(axis=1))
    s = _ratio(a, b)
    s[own_size <= 1] = 0.0
    return _report(s, part, idx, alpha, "apr")


def approx_silhouette_aps(data: Dataset, part: Partition, indices=None,
                          alpha: float = 0.5) -> SilhouetteReport:
    """Centroid-distance proxy: a = own-centroid distance, b = nearest other centroid."""
    _require_two_clusters(part)
    idx = _indices(data.n, indices)
    own = part.assignments[idx]
    dist = cdist(data.points[idx], part.centroids)
    rows = np.arange(idx.size)
    a = dist[rows, own].copy()
    dist[rows, own] = np.inf
    b = dist.min(axis=1)
    s = _ratio(a, b)
    sizes = part.sizes()
    s[sizes[own] <= 1] = 0.0
    return _report(s, part, idx, alpha, "aps")


def silhouette(data: Dataset, part: Partition, indices=None, mode: str = "exact",
               alpha: float = 0.5) -> SilhouetteReport:
    if mode == "exact":
        return exact_silhouette(data, part, indices, alpha)
    if mode == "apr":
        return approx_silhouette_apr(data, None, part, indices, alpha)
    if mode == "aps":
        return approx_silhouette_aps(data, part, indices, alpha)
    raise ValueError(f"unknown silhouette mode {mode!r}")


def sample_indices(part: Partition, m: int, objective: str, rng: np.random.Generator) -> np.ndarray:
    """Objective-aware sample of ``m`` point indices, sorted ascending.

    ``micro`` draws uniformly without replacement. ``macro`` and ``combined``
    take ``m // k`` points per cluster (whole cluster when smaller) and hand
    the remainder out one point at a time, cycling through clusters in index
    order. Both strategies leave every cluster with at least one point.
    """
    labels = part.assignments
    n = labels.size
    k = part.k
    if m < k:
        raise SampleTooSmall(f"sample size {m} < k = {k}")
    if m >= n:
        return np.arange(n)
    members = [np.flatnonzero(labels == j) for j in range(k)]
    if objective == "micro":
        chosen = rng.choice(n, size=m, replace=False)
        counts = np.bincount(labels[chosen], minlength=k)
        for j in range(k):
            if counts[j] == 0 and members[j].size:
                # swap out a point from the best-represented cluster
                donor = int(np.argmax(counts))
                pos = rng.choice(np.flatnonzero(labels[chosen] == donor))
                chosen[pos] = rng.choice(members[j])
                counts[donor] -= 1
                counts[j] += 1
        return np.sort(chosen)
    order = [rng.permutation(mem) for mem in members]
    take = np.array([min(m // k, mem.size) for mem in members])
    left = m - int(take.sum())
    j = 0
    while left > 0:
        if take[j] < order[j].size:
            take[j] += 1
            left -= 1
        j = (j + 1) % k
    return np.sort(np.concatenate([order[j][:take[j]] for j in range(k)]))
