"""Domain types shared by every module, and dataset validation."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    EmptyDataset,
    InvalidConfig,
    KTooLarge,
    KTooSmall,
    LabelLengthMismatch,
    NonFiniteValue,
    RaggedDimensions,
)

OBJECTIVES = ("macro", "micro", "combined")
SCHEMES = ("power", "exponential")
INITS = ("random", "kmeanspp")
REINIT_STRATEGIES = ("largest", "variance")

# Spans the 0-20 sensitivity range explored for both schemes.
DEFAULT_P_GRID = (0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 8.0, 12.0, 16.0, 20.0)

# RNG stream ids derived from one seed.
INIT_STREAM = 0
SAMPLE_STREAM = 1


def make_rng(seed: int, stream: int = INIT_STREAM) -> np.random.Generator:
    """Deterministic generator for one named stream of a 64-bit seed."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=(stream,))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(seed: int, *key: int) -> int:
    """Derive an independent 64-bit seed for sub-task ``key`` of ``seed``."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    points: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = "data"

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @cached_property
    def distances(self) -> np.ndarray:
        """Full Euclidean distance matrix, computed once on first use."""
        return _frozen(cdist(self.points, self.points))

    @cached_property
    def neighbor_order(self):
        """``(dist, idx)``: every row's other points sorted by distance, self excluded."""
        D = np.array(self.distances)
        np.fill_diagonal(D, np.inf)
        order = np.argsort(D, axis=1, kind="stable")[:, :-1]
        return _frozen(np.take_along_axis(D, order, axis=1)), _frozen(order)

    def memo(self, key, compute):
        """Cache a derived value on this (immutable) dataset."""
        cache = self.__dict__.setdefault("_memo", {})
        if key not in cache:
            cache[key] = compute()
        return cache[key]

    def with_points(self, points: np.ndarray, name: Optional[str] = None) -> "Dataset":
        return validate_dataset(points, self.labels, name or self.name)


def validate_dataset(raw, labels=None, name: str = "data") -> Dataset:
    """Build a :class:`Dataset`, checking shape, finiteness and label length."""
    if isinstance(raw, np.ndarray):
        if raw.size == 0:
            raise EmptyDataset("dataset has no points")
        if raw.ndim != 2:
            raise RaggedDimensions(f"expected a 2-d point matrix, got shape {raw.shape}")
        rows = raw
    else:
        rows = list(raw)
        if not rows:
            raise EmptyDataset("dataset has no points")
        dims = {len(r) for r in rows}
        if len(dims) != 1:
            raise RaggedDimensions(f"points have differing dimensions: {sorted(dims)}")
    try:
        pts = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise NonFiniteValue(f"non-numeric coordinate: {exc}") from None
    if pts.shape[1] == 0:
        raise RaggedDimensions("points must have dimension >= 1")
    bad = ~np.isfinite(pts)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NonFiniteValue(f"non-finite coordinate at point {i}, feature {j}")
    lab = None
    if labels is not None:
        lab = np.asarray(labels)
        if lab.ndim != 1 or lab.shape[0] != pts.shape[0]:
            raise LabelLengthMismatch(
                f"{lab.shape[0] if lab.ndim else 0} labels for {pts.shape[0]} points"
            )
        lab = _frozen(lab.copy())
    return Dataset(_frozen(pts.copy()), lab, name)


@dataclass(frozen=True, eq=False)
class Partition:
    assignments: np.ndarray
    centroids: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "assignments", _frozen(np.asarray(self.assignments, dtype=np.intp).copy()))
        object.__setattr__(self, "centroids", _frozen(np.asarray(self.centroids, dtype=np.float64).copy()))

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


def check_partition(part: Partition, n: int, d: Optional[int] = None) -> None:
    """Assert the invariants every clustering output must satisfy."""
    a = part.assignments
    assert a.shape == (n,), f"assignments shape {a.shape} != ({n},)"
    assert part.centroids.ndim == 2 and part.k >= 1
    if d is not None:
        assert part.centroids.shape[1] == d
    assert a.min() >= 0 and a.max() < part.k, "assignment index out of range"
    assert (part.sizes() > 0).all(), f"empty cluster in partition: sizes {part.sizes()}"
    assert np.isfinite(part.centroids).all()


@dataclass(frozen=True, eq=False)
class SilhouetteReport:
    per_point: np.ndarray
    evaluated_indices: np.ndarray
    micro: float
    macro: float
    combined: float
    mode: str
    alpha: float = 0.5

    def objective(self, name: str) -> float:
        if name == "macro":
            return self.macro
        if name == "micro":
            return self.micro
        if name == "combined":
            return self.combined
        raise InvalidConfig(f"unknown objective {name!r}")

    def as_dict(self) -> dict:
        return {"mode": self.mode, "S_m": self.micro, "S_M": self.macro,
                "combined": self.combined, "alpha": self.alpha,
                "n_evaluated": int(self.evaluated_indices.size)}


@dataclass(frozen=True, eq=False)
class WeightVector:
    weights: np.ndarray
    indices: np.ndarray
    scheme: str
    sensitivity: float


@dataclass(frozen=True, eq=False)
class TraceRecord:
    """State of one partition visited by a run.

    ``movement`` is the mean centroid shift that produced this partition
    (0 for the initial one); ``weighted_objective`` is the weighted
    silhouette sum computed from this partition's scores and weights.
    """

    iteration: int
    objective: float
    weighted_objective: float
    movement: float
    labels: np.ndarray
    scores: np.ndarray
    evaluated_indices: np.ndarray


@dataclass(frozen=True, eq=False)
class RunResult:
    best_partition: Partition
    best_objective: float
    iterations_run: int
    trace: tuple
    terminated_by: str
    best_evaluated_indices: np.ndarray
    final_partition: Partition
    objective: str = "macro"
    mode: str = "exact"
    exact_report: Optional[SilhouetteReport] = None
    params: dict = field(default_factory=dict)

    @property
    def best_iteration(self) -> int:
        return int(np.argmax([r.objective for r in self.trace]))

    def summary(self) -> dict:
        out = {
            "objective": self.objective,
            "mode": self.mode,
            "best_objective": self.best_objective,
            "best_iteration": self.best_iteration,
            "iterations_run": self.iterations_run,
            "terminated_by": self.terminated_by,
            "params": dict(self.params),
        }
        if self.exact_report is not None:
            out["exact"] = self.exact_report.as_dict()
        return out


@dataclass(frozen=True)
class KsilConfig:
    k: int
    objective: str = "macro"
    alpha: float = 0.5
    init: str = "kmeanspp"
    scheme: str = "power"
    p: float = 1.0
    auto_p: bool = False
    p_grid: Sequence[float] = DEFAULT_P_GRID
    sample_size: Optional[int] = None
    approximate: bool = False
    tau: float = 1e-4
    max_iter: int = 100
    seed: int = 0
    eps: float = 1e-8
    reinit: str = "largest"
    exact_report_cap: int = 5000

    def validate(self, n: Optional[int] = None) -> "KsilConfig":
        if self.k < 2:
            raise KTooSmall(f"k must be >= 2, got {self.k}")
        if n is not None and self.k >= n:
            raise KTooLarge(f"k must be < n ({n}), got {self.k}")
        if self.objective not in OBJECTIVES:
            raise InvalidConfig(f"objective must be one of {OBJECTIVES}")
        if self.scheme not in SCHEMES:
            raise InvalidConfig(f"scheme must be one of {SCHEMES}")
        if self.init not in INITS:
            raise InvalidConfig(f"init must be one of {INITS}")
        if self.reinit not in REINIT_STRATEGIES:
            raise InvalidConfig(f"reinit must be one of {REINIT_STRATEGIES}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidConfig("alpha must lie in [0, 1]")
        if not self.tau > 0:
            raise InvalidConfig("tau must be > 0")
        if self.max_iter < 1:
            raise InvalidConfig("max_iter must be >= 1")
        if not (np.isfinite(self.p) and self.p >= 0):
            raise InvalidConfig("p must be finite and >= 0")
        if self.auto_p and len(self.p_grid) == 0:
            raise InvalidConfig("p_grid must be non-empty")
        if not 0 < self.eps <= 1e-3:
            raise InvalidConfig("eps must lie in (0, 1e-3]")
        if self.sample_size is not None:
            if self.sample_size < self.k:
                raise InvalidConfig("sample_size must be >= k")
            if n is not None and self.sample_size > n:
                raise InvalidConfig("sample_size must be <= n")
        return self
