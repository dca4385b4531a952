"""Shared oracles and helpers. Oracles here are deliberately naive."""
import math

import numpy as np
import pytest

from ksil.core import Partition, validate_dataset


def naive_silhouette(points, labels):
    """Per-point silhouette by explicit double loop over pairs."""
    X = np.asarray(points, dtype=float)
    lab = list(labels)
    n = len(lab)
    ks = sorted(set(lab))
    out = []
    for i in range(n):
        own = [j for j in range(n) if lab[j] == lab[i] and j != i]
        if not own:
            out.append(0.0)
            continue
        a = sum(math.dist(X[i], X[j]) for j in own) / len(own)
        b = math.inf
        for c in ks:
            if c == lab[i]:
                continue
            mem = [j for j in range(n) if lab[j] == c]
            b = min(b, sum(math.dist(X[i], X[j]) for j in mem) / len(mem))
        m = max(a, b)
        out.append(0.0 if m == 0 else (b - a) / m)
    return np.array(out)


def partition_from_labels(points, labels, k=None):
    X = np.asarray(points, dtype=float)
    lab = np.asarray(labels)
    k = k or int(lab.max()) + 1
    cents = np.array([X[lab == j].mean(axis=0) for j in range(k)])
    return Partition(lab, cents)


def dataset(points, labels=None):
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    return validate_dataset(pts, labels)


def two_blobs(seed, n_per=30, sep=10.0, sigma=1.0, d=2):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, sigma, (n_per, d))
    b = rng.normal(0.0, sigma, (n_per, d))
    b[:, 0] += sep * sigma
    return validate_dataset(np.vstack([a, b]), np.repeat([0, 1], n_per))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
