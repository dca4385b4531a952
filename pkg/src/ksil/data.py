"""Synthetic benchmark datasets, CSV ingestion and z-score standardization.

Generator constants
-------------------
The geometry below is fixed so that every dataset is reproducible from its
seed alone.

``s1``  five isotropic 2-d Gaussians, 100 points each, centres on a regular
        pentagon of radius 6, standard deviations 0.4, 0.8, 1.2, 1.6, 2.0.
``s2``  five Gaussians with sigma 1 in 12 dimensions, 100 points each,
        centre j at ``12 * e_j``.
``s3``  as ``s2`` with sigma 2.5.
``s4``  1500 points in 2-d: 375 on a circle of radius 4 around the origin
        (radial noise sd 0.25), 375 on the vertical segment x = 7,
        y in [-5, 5] (horizontal noise sd 0.25) and 750 uniform background
        points on [-7, 10] x [-7, 7]. Labels: circle 0, line 1, noise 2.
``blobs`` k Gaussians with centres uniform in [-10, 10]^d.

For ``s1``-``s3`` and ``blobs`` a non-zero ``noise_fraction`` replaces that
share of the points with uniform noise over the padded bounding box of the
clusters, labelled ``k``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import Dataset, validate_dataset
from .errors import InvalidSpec, MixedArity, ParseError

FAMILIES = ("s1", "s2", "s3", "s4", "blobs")

S1_SIGMAS = (0.4, 0.8, 1.2, 1.6, 2.0)
S1_RADIUS = 6.0
S23_SCALE = 12.0
S4_RADIUS = 4.0
S4_JITTER = 0.25
S4_LINE_X = 7.0
S4_LINE_HALF = 5.0
S4_BOX = ((-7.0, 10.0), (-7.0, 7.0))
BLOB_BOX = (-10.0, 10.0)

_DEFAULTS = {
    "s1": dict(n=500, d=2, k=5, sigma=S1_SIGMAS, noise_fraction=0.0),
    "s2": dict(n=500, d=12, k=5, sigma=1.0, noise_fraction=0.0),
    "s3": dict(n=500, d=12, k=5, sigma=2.5, noise_fraction=0.0),
    "s4": dict(n=1500, d=2, k=2, sigma=S4_JITTER, noise_fraction=0.5),
    "blobs": dict(n=300, d=2, k=3, sigma=1.0, noise_fraction=0.0),
}


@dataclass(frozen=True)
class SyntheticSpec:
    family: str
    n: Optional[int] = None
    d: Optional[int] = None
    k: Optional[int] = None
    sigma: Union[float, Sequence[float], None] = None
    noise_fraction: Optional[float] = None
    seed: int = 0

    def resolved(self) -> "SyntheticSpec":
        if self.family not in FAMILIES:
            raise InvalidSpec(f"family must be one of {FAMILIES}, got {self.family!r}")
        base = _DEFAULTS[self.family]
        spec = SyntheticSpec(
            self.family,
            base["n"] if self.n is None else int(self.n),
            base["d"] if self.d is None else int(self.d),
            base["k"] if self.k is None else int(self.k),
            base["sigma"] if self.sigma is None else self.sigma,
            base["noise_fraction"] if self.noise_fraction is None else float(self.noise_fraction),
            int(self.seed),
        )
        if spec.family == "s4" and (spec.k != 2 or spec.d != 2):
            raise InvalidSpec("s4 has fixed geometry: k=2 shapes in d=2")
        if spec.k < 1 or spec.d < 1:
            raise InvalidSpec("k and d must be >= 1")
        if spec.n < spec.k:
            raise InvalidSpec(f"n ({spec.n}) must be >= k ({spec.k})")
        if not 0.0 <= spec.noise_fraction < 1.0:
            raise InvalidSpec("noise_fraction must lie in [0, 1)")
        if spec.family in ("s2", "s3") and spec.d < spec.k:
            raise InvalidSpec("s2/s3 place centres on coordinate axes and need d >= k")
        sig = np.atleast_1d(np.asarray(spec.sigma, dtype=np.float64))
        if sig.size not in (1, spec.k) or (sig < 0).any():
            raise InvalidSpec("sigma must be one non-negative value or one per cluster")
        return spec

    @property
    def name(self) -> str:
        return f"{self.family}-seed{self.seed}"


def _split(total: int, parts: int) -> list:
    base, extra = divmod(total, parts)
    return [base + (1 if j < extra else 0) for j in range(parts)]


def _centres(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    k, d = spec.k, spec.d
    if spec.family == "s1":
        ang = np.pi / 2 + 2 * np.pi * np.arange(k) / k
        c = np.zeros((k, d))
        c[:, 0] = S1_RADIUS * np.cos(ang)
        if d > 1:
            c[:, 1] = S1_RADIUS * np.sin(ang)
        return c
    if spec.family in ("s2", "s3"):
        return S23_SCALE * np.eye(k, d)
    return rng.uniform(*BLOB_BOX, size=(k, d))


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Draw a labelled dataset for ``spec``; identical specs give identical data."""
    spec = spec.resolved()
    rng = np.random.default_rng(spec.seed)
    n_noise = int(round(spec.noise_fraction * spec.n))
    n_struct = spec.n - n_noise
    if spec.family == "s4":
        n_circle, n_line = _split(n_struct, 2)
        theta = rng.uniform(0.0, 2 * np.pi, n_circle)
        r = S4_RADIUS + rng.normal(0.0, S4_JITTER, n_circle)
        circle = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        y = rng.uniform(-S4_LINE_HALF, S4_LINE_HALF, n_line)
        line = np.column_stack([S4_LINE_X + rng.normal(0.0, S4_JITTER, n_line), y])
        noise = np.column_stack([rng.uniform(*S4_BOX[0], n_noise), rng.uniform(*S4_BOX[1], n_noise)])
        pts = np.vstack([circle, line, noise])
        labels = np.repeat([0, 1, 2], [n_circle, n_line, n_noise])
        return validate_dataset(pts, labels, spec.name)

    centres = _centres(spec, rng)
    sig = np.broadcast_to(np.atleast_1d(np.asarray(spec.sigma, dtype=np.float64)), (spec.k,))
    sizes = _split(n_struct, spec.k)
    blocks = [centres[j] + sig[j] * rng.standard_normal((sizes[j], spec.d)) for j in range(spec.k)]
    labels = [np.full(sizes[j], j) for j in range(spec.k)]
    if n_noise:
        pad = 3.0 * float(sig.max())
        lo = centres.min(axis=0) - pad
        hi = centres.max(axis=0) + pad
        blocks.append(rng.uniform(lo, hi, size=(n_noise, spec.d)))
        labels.append(np.full(n_noise, spec.k))
    return validate_dataset(np.vstack(blocks), np.concatenate(labels), spec.name)


def standardize(data: Dataset) -> Dataset:
    """Per-feature z-score with the population standard deviation; constant features become 0."""
    if data.n < 2:
        raise InvalidSpec("standardization needs at least two points")
    X = data.points
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    Z = np.zeros_like(X)
    np.divide(X - mu, sd, out=Z, where=sd > 0)
    return validate_dataset(Z, data.labels, data.name)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def _label_value(cell: str):
    try:
        return int(cell)
    except ValueError:
        return cell


def load_csv(path, has_header: Optional[bool] = None,
             label_column: Union[str, int, None] = None, name: Optional[str] = None) -> Dataset:
    """Read a comma-separated numeric file into a :class:`Dataset`.

    ``has_header=None`` treats the first row as a header when any of its cells
    is non-numeric. ``label_column`` is a header name or a 0-based column
    index; that column becomes the labels and is dropped from the features.
    Error messages give 1-based file line numbers.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: no data rows")
    header = None
    if has_header is None:
        has_header = not all(_is_number(c) for c in rows[0][1])
    if has_header:
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path}: header but no data rows")
    width = len(header) if header is not None else len(rows[0][1])
    lab_idx = None
    if label_column is not None:
        if isinstance(label_column, int) or (isinstance(label_column, str) and label_column.isdigit()
                                             and (header is None or label_column not in header)):
            lab_idx = int(label_column)
        elif header is not None and label_column in header:
            lab_idx = header.index(label_column)
        else:
            raise ParseError(f"{path}: label column {label_column!r} not found")
        if not 0 <= lab_idx < width:
            raise ParseError(f"{path}: label column index {lab_idx} out of range for {width} columns")
    points, labels = [], []
    for lineno, row in rows:
        if len(row) != width:
            raise MixedArity(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        feats = []
        for j, cell in enumerate(row):
            if j == lab_idx:
                labels.append(_label_value(cell.strip()))
                continue
            try:
                feats.append(float(cell))
            except ValueError:
                raise ParseError(f"{path}: row {lineno}, column {j + 1}: "
                                 f"cannot parse {cell!r} as a number") from None
        points.append(feats)
    return validate_dataset(points, labels if lab_idx is not None else None, name or path.stem)


def write_csv(data: Dataset, path, label_name: str = "label") -> None:
    """Write points (17 significant digits) and labels, with a header row."""
    path = Path(path)
    cols = [f"x{j}" for j in range(data.d)]
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols + ([label_name] if data.labels is not None else []))
        for i in range(data.n):
            row = [repr(float(v)) for v in data.points[i]]
            if data.labels is not None:
                row.append(str(data.labels[i]))
            w.writerow(row)


def ground_truth_k(data: Dataset) -> Optional[int]:
    if data.labels is None:
        return None
    return int(np.unique(data.labels).size)


def parse_k_range(text: str) -> list:
    """``"2..10"`` -> [2, ..., 10]; a single integer is a one-element range."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
    else:
        lo = hi = int(text)
    if lo > hi:
        raise ValueError(f"empty k range {text!r}")
    return list(range(lo, hi + 1))

