"""Per-cluster instance weights derived from silhouette scores."""
from __future__ import annotations

import numpy as np

from .core import WeightVector

DEFAULT_EPS = 1e-8


def dense_rank_desc(scores) -> np.ndarray:
    """Dense ranks with the highest score ranked 1 and ties sharing a rank."""
    s = np.asarray(scores, dtype=np.float64)
    uniq = np.unique(s)  # ascending
    return (uniq.size - np.searchsorted(uniq, s)).astype(np.int64)


def power_weights(scores, p: float, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Median-scaled power of the score's offset above the cluster minimum.

    Within one cluster: ``w = ((s - s_min + eps) / median(s - s_min + eps)) ** p``.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.size <= 1 or p == 0:
        return np.ones_like(s)
    shifted = s - s.min() + eps
    med = np.median(shifted)
    if not med > 0:
        return np.ones_like(s)
    with np.errstate(over="ignore", under="ignore"):
        return (shifted / med) ** p


def exponential_weights(scores, p: float) -> np.ndarray:
    """Exponential decay in descending dense rank, centred on the median rank.

    ``w = exp(-p * (rank - median(rank)) / (max_rank / 2))``.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.size <= 1 or p == 0:
        return np.ones_like(s)
    ranks = dense_rank_desc(s).astype(np.float64)
    med = np.median(ranks)
    with np.errstate(over="ignore", under="ignore"):
        return np.exp(-p * (ranks - med) / (ranks.max() / 2.0))


def cluster_weights(scores, scheme: str, p: float, eps: float = DEFAULT_EPS) -> np.ndarray:
    if scheme == "power":
        return power_weights(scores, p, eps)
    if scheme in ("exponential", "exp"):
        return exponential_weights(scores, p)
    raise ValueError(f"unknown weighting scheme {scheme!r}")


def silhouette_weights(labels, indices, scores, scheme: str, p: float,
                       eps: float = DEFAULT_EPS) -> WeightVector:
    """Weight every scored point relative to the other scored points of its cluster.

    ``indices`` are the scored points (into ``labels``), aligned with ``scores``.
    """
    idx = np.asarray(indices, dtype=np.intp)
    s = np.asarray(scores, dtype=np.float64)
    lab = np.asarray(labels)[idx]
    w = np.empty_like(s)
    order = np.argsort(lab, kind="stable")
    bounds = np.flatnonzero(np.diff(lab[order])) + 1
    for group in np.split(order, bounds):
        if group.size:
            w[group] = cluster_weights(s[group], scheme, p, eps)
    w.flags.writeable = False
    return WeightVector(w, idx, "exponential" if scheme == "exp" else scheme, float(p))
