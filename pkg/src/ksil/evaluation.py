"""External validation and the statistics used to compare clusterings."""
from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import stats

from .errors import (
    ConstantSequence,
    LengthMismatch,
    TooFewPairs,
    TooFewSamples,
    ZeroBaseline,
)

# Largest n for which the exact null distribution is enumerated.
EXACT_MAX_N = 25


def nmi(labels_a, labels_b) -> float:
    """Normalized mutual information, arithmetic-mean normalization, natural log.

    Two single-cluster labelings (both entropies zero) give 0.
    """
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"label vectors differ in shape: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise LengthMismatch("label vectors are empty")
    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    n = a.size
    table = np.zeros((ia.max() + 1, ib.max() + 1))
    np.add.at(table, (ia, ib), 1.0)
    pij = table / n
    pi = pij.sum(axis=1)
    pj = pij.sum(axis=0)
    nz = pij > 0
    mi = float(np.sum(pij[nz] * np.log(pij[nz] / np.outer(pi, pj)[nz])))
    ha = float(-np.sum(pi * np.log(pi)))
    hb = float(-np.sum(pj * np.log(pj)))
    denom = 0.5 * (ha + hb)
    if denom <= 0:
        return 0.0
    return float(min(max(mi / denom, 0.0), 1.0))


def spearman_rho(a, b) -> float:
    """Pearson correlation of average ranks."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch("sequences must have equal length")
    if x.size < 2:
        raise LengthMismatch("need at least two pairs")
    rx = stats.rankdata(x) - (x.size + 1) / 2.0
    ry = stats.rankdata(y) - (y.size + 1) / 2.0
    sx = np.sqrt(np.dot(rx, rx))
    sy = np.sqrt(np.dot(ry, ry))
    if sx == 0 or sy == 0:
        raise ConstantSequence("rank correlation undefined for a constant sequence")
    return float(np.clip(np.dot(rx, ry) / (sx * sy), -1.0, 1.0))


class WilcoxonResult(NamedTuple):
    statistic: float  # W+, sum of ranks of positive differences
    p_value: float
    n: int  # non-zero pairs used
    n_zero: int  # dropped zero differences
    method: str  # exact | normal


@lru_cache(maxsize=None)
def _signed_rank_counts(n: int) -> tuple:
    """``counts[w]`` = number of sign patterns of ranks 1..n with W+ = w."""
    top = n * (n + 1) // 2
    counts = [0] * (top + 1)
    counts[0] = 1
    for r in range(1, n + 1):
        for w in range(top, r - 1, -1):
            counts[w] += counts[w - r]
    return tuple(counts)


def _normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def wilcoxon_signed_rank(diffs, alternative: str = "greater", method: str = "auto") -> WilcoxonResult:
    """Wilcoxon signed-rank test on paired differences.

    Zero differences are dropped. ``method="auto"`` enumerates the exact null
    distribution when at most 25 pairs remain and ``|d|`` has no ties;
    otherwise it uses the normal approximation with tie and continuity
    corrections. ``alternative`` is ``greater`` (differences tend positive)
    or ``two-sided``.
    """
    if alternative not in ("greater", "two-sided"):
        raise ValueError(f"unsupported alternative {alternative!r}")
    d = np.asarray(diffs, dtype=np.float64)
    nz = d[d != 0]
    n_zero = int(d.size - nz.size)
    n = int(nz.size)
    if n < 5:
        raise TooFewPairs(f"{n} non-zero differences; need at least 5")
    absd = np.abs(nz)
    ranks = stats.rankdata(absd)
    w_plus = float(ranks[nz > 0].sum())
    ties = np.unique(absd).size < n
    if method == "auto":
        method = "exact" if (n <= EXACT_MAX_N and not ties) else "normal"
    if method == "exact":
        if ties:
            raise ValueError("exact method requires untied |differences|")
        counts = _signed_rank_counts(n)
        total = 2 ** n
        w = int(round(w_plus))
        upper = float(sum(counts[w:]) / total)  # P(W+ >= w)
        if alternative == "greater":
            p = upper
        else:
            lower = float(sum(counts[:w + 1]) / total)
            p = min(1.0, 2.0 * min(upper, lower))
    elif method == "normal":
        mean = n * (n + 1) / 4.0
        _, tcounts = np.unique(absd, return_counts=True)
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tcounts ** 3 - tcounts)) / 48.0
        sd = math.sqrt(var)
        if alternative == "greater":
            p = _normal_sf((w_plus - mean - 0.5) / sd)
        else:
            z = max(abs(w_plus - mean) - 0.5, 0.0) / sd
            p = min(1.0, 2.0 * _normal_sf(z))
    else:
        raise ValueError(f"unknown method {method!r}")
    return WilcoxonResult(w_plus, float(p), n, n_zero, method)


def relative_improvement(scores_a, scores_b) -> float:
    """Mean over pairs of ``100 * (a - b) / |b|``."""
    a = np.asarray(scores_a, dtype=np.float64)
    b = np.asarray(scores_b, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch("score vectors must be paired")
    if a.size == 0:
        raise LengthMismatch("no score pairs")
    if (b == 0).any():
        raise ZeroBaseline("baseline score of exactly 0 makes the relative change undefined")
    return float(np.mean(100.0 * (a - b) / np.abs(b)))


class ConfidenceInterval(NamedTuple):
    mean: float
    lo: float
    hi: float


def t_confidence_interval(samples, level: float = 0.95) -> ConfidenceInterval:
    """Student-t interval for the mean: ``mean +- t * s / sqrt(n)``."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise TooFewSamples("need at least two samples")
    mean = float(x.mean())
    s = float(x.std(ddof=1))
    half = float(stats.t.ppf((1.0 + level) / 2.0, x.size - 1)) * s / math.sqrt(x.size)
    return ConfidenceInterval(mean, mean - half, mean + half)
