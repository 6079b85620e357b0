"""Seeded 2-D toy datasets, preprocessing and CSV interchange."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from vqkmeans._seeding import make_rng
from vqkmeans.quantum import ShapeError

DEFAULT_RANGE = (-math.pi / 2, math.pi / 2)


@dataclass
class Dataset:
    points: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = "dataset"
    seed: Optional[int] = None
    transforms: list = field(default_factory=list)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape != (len(self.points),):
                raise ShapeError(f"expected {len(self.points)} labels, got shape {self.labels.shape}")
            if self.labels.size and self.labels.min() < 0:
                raise ValueError("labels must be non-negative cluster indices")

    def __len__(self):
        return len(self.points)

    @property
    def n_clusters(self) -> Optional[int]:
        if self.labels is None or not self.labels.size:
            return None
        return int(self.labels.max()) + 1


def _labels_for(n_per_cluster: int, k: int) -> np.ndarray:
    return np.repeat(np.arange(k), n_per_cluster)


def make_blobs(n_per_cluster: int = 100, k: int = 3, centers=None, stddev: float = 0.3,
               seed: int = 0, box: float = 10.0) -> Dataset:
    """Isotropic Gaussian clouds.

    Without ``centers``, ``k`` centers are drawn uniformly in ``[-box, box]^2``
    and redrawn until every pair is at least ``10 * stddev`` apart.
    """
    if not stddev > 0:
        raise ValueError(f"stddev must be positive, got {stddev}")
    rng = make_rng(seed, 0)
    if centers is None:
        min_sep = min(10 * stddev, box)
        for _ in range(10_000):
            centers = rng.uniform(-box, box, size=(k, 2))
            gaps = np.linalg.norm(centers[:, None] - centers[None], axis=-1)
            if k == 1 or gaps[np.triu_indices(k, 1)].min() >= min_sep:
                break
    centers = np.asarray(centers, dtype=float)
    k = len(centers)
    pts = np.repeat(centers, n_per_cluster, axis=0)
    pts = pts + rng.normal(0.0, stddev, size=pts.shape)
    return Dataset(pts, _labels_for(n_per_cluster, k), "blobs", seed)


def make_circles(n_per_cluster: int = 100, radii=(0.5, 1.0), noise: float = 0.03, seed: int = 0) -> Dataset:
    """Concentric rings around the origin, labelled innermost first."""
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or np.any(np.diff(radii) <= 0):
        raise ValueError(f"radii must be strictly increasing, got {radii.tolist()}")
    if noise < 0:
        raise ValueError(f"noise must be non-negative, got {noise}")
    rng = make_rng(seed, 1)
    k = len(radii)
    angle = rng.uniform(0.0, 2 * math.pi, size=k * n_per_cluster)
    r = np.repeat(radii, n_per_cluster)
    if noise:
        r = r + rng.normal(0.0, noise, size=r.shape)
    pts = np.column_stack([r * np.cos(angle), r * np.sin(angle)])
    return Dataset(pts, _labels_for(n_per_cluster, k), "circles", seed)


def make_moons(n_per_cluster: int = 100, noise: float = 0.1, seed: int = 0) -> Dataset:
    """Two interleaving half circles.

    Class 0 is the upper unit half circle; class 1 is the point-reflected
    half circle ``(1 - cos t, 1 - sin t - 0.5)``, which reaches into the
    mouth of class 0.
    """
    if noise < 0:
        raise ValueError(f"noise must be non-negative, got {noise}")
    rng = make_rng(seed, 2)
    t0 = rng.uniform(0.0, math.pi, size=n_per_cluster)
    t1 = rng.uniform(0.0, math.pi, size=n_per_cluster)
    upper = np.column_stack([np.cos(t0), np.sin(t0)])
    lower = np.column_stack([1.0 - np.cos(t1), 1.0 - np.sin(t1) - 0.5])
    pts = np.vstack([upper, lower])
    if noise:
        pts = pts + rng.normal(0.0, noise, size=pts.shape)
    return Dataset(pts, _labels_for(n_per_cluster, 2), "moons", seed)


# quadrant q has signs (sx, sy)
QUADRANT_SIGNS = ((1, 1), (-1, 1), (-1, -1), (1, -1))


def make_corners(n_per_cluster: int = 100, seed: int = 0, noise: float = 0.03) -> Dataset:
    """Four L-shaped clusters, one hugging each corner of the square [-1, 1]^2.

    Each L has a horizontal arm ``(s_x u, s_y)`` and a vertical arm
    ``(s_x, s_y u)`` with ``u ~ U[0.2, 1]`` plus Gaussian jitter. Coordinates
    keep the quadrant's signs, so cluster q lies strictly in quadrant q
    (counter-clockwise from the positive quadrant).
    """
    if n_per_cluster < 1:
        raise ValueError(f"n_per_cluster must be >= 1, got {n_per_cluster}")
    rng = make_rng(seed, 3)
    blocks = []
    for sx, sy in QUADRANT_SIGNS:
        u = rng.uniform(0.2, 1.0, size=n_per_cluster)
        horizontal = rng.random(n_per_cluster) < 0.5
        arm = np.where(horizontal[:, None], np.column_stack([u, np.ones_like(u)]),
                       np.column_stack([np.ones_like(u), u]))
        arm = np.abs(arm + rng.normal(0.0, noise, size=arm.shape))
        blocks.append(arm * (sx, sy))
    return Dataset(np.vstack(blocks), _labels_for(n_per_cluster, 4), "corners", seed)


def preprocess(dataset: Dataset, target_range=DEFAULT_RANGE) -> Dataset:
    """Standardize each feature, then map it linearly onto ``target_range``.

    A constant feature has no spread and is set to the range midpoint.
    """
    X = dataset.points
    if X.size == 0:
        raise ValueError("cannot preprocess an empty dataset")
    lo, hi = map(float, target_range)
    if not hi > lo:
        raise ValueError(f"target_range must be increasing, got {target_range}")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    out = np.empty_like(X)
    events = []
    for f in range(X.shape[1]):
        if std[f] == 0 or np.ptp(X[:, f]) == 0:
            out[:, f] = 0.5 * (lo + hi)
            events.append(f"feature {f} has zero variance; set to range midpoint")
            continue
        z = (X[:, f] - mean[f]) / std[f]
        zmin, zmax = z.min(), z.max()
        out[:, f] = lo + (z - zmin) * (hi - lo) / (zmax - zmin)
        # pin the extremes so the range bound holds exactly
        out[z == zmin, f] = lo
        out[z == zmax, f] = hi
    record = {
        "op": "standardize+minmax",
        "mean": mean.tolist(),
        "std": std.tolist(),
        "target_range": [lo, hi],
    }
    if events:
        record["events"] = events
    return replace(dataset, points=out, transforms=dataset.transforms + [record])


def to_polar(dataset: Dataset) -> Dataset:
    """(x, y) -> (r, phi) with phi = atan2(y, x) in (-pi, pi]."""
    X = dataset.points
    if X.shape[1] != 2:
        raise ShapeError(f"polar transform needs 2 features, got {X.shape[1]}")
    r = np.hypot(X[:, 0], X[:, 1])
    phi = np.arctan2(X[:, 1], X[:, 0])
    phi = np.where(phi == -math.pi, math.pi, phi)
    return replace(dataset, points=np.column_stack([r, phi]),
                   transforms=dataset.transforms + [{"op": "polar"}])


GENERATORS = {
    "blobs": make_blobs,
    "circles": make_circles,
    "moons": make_moons,
    "corners": make_corners,
}


def generate(kind: str, n_per_cluster: int = 100, seed: int = 0, **params) -> Dataset:
    if kind not in GENERATORS:
        raise KeyError(f"unknown dataset kind {kind!r}; expected one of {sorted(GENERATORS)}")
    return GENERATORS[kind](n_per_cluster=n_per_cluster, seed=seed, **params)


# CSV interchange: header x1,x2[,label]

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dumps_csv(dataset: Dataset) -> str:
    d = dataset.points.shape[1]
    header = [f"x{i + 1}" for i in range(d)]
    if dataset.labels is not None:
        header.append("label")
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for i, row in enumerate(dataset.points):
        cells = [_fmt(v) for v in row]
        if dataset.labels is not None:
            cells.append(str(int(dataset.labels[i])))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def atomic_write_text(path, text: str):
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_csv(dataset: Dataset, path):
    atomic_write_text(path, dumps_csv(dataset))


class CSVFormatError(ValueError):
    pass


def load_csv(path, name: Optional[str] = None) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CSVFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    has_label = header[-1] == "label"
    features = header[:-1] if has_label else header
    if not features or features != [f"x{i + 1}" for i in range(len(features))]:
        raise CSVFormatError(f"{path}: bad header {header!r}; expected x1,x2[,label]")
    points, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise CSVFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            points.append([float(v) for v in row[: len(features)]])
            if has_label:
                labels.append(int(row[-1]))
        except ValueError as exc:
            raise CSVFormatError(f"{path}:{lineno}: {exc}") from None
    if not points:
        raise CSVFormatError(f"{path}: no data rows")
    stem = name or os.path.splitext(os.path.basename(os.fspath(path)))[0]
    return Dataset(np.array(points), np.array(labels) if has_label else None, stem)
