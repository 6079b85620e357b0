"""Exact simulation of the q-means subroutine on embedded states.

States are passed around as ``(N, 2**n)`` complex arrays (one row per
state); lists of :class:`~vqkmeans.quantum.Statevector` are accepted
wherever a state collection is expected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Optional

import numpy as np

from vqkmeans._seeding import make_rng
from vqkmeans.feature_map import FeatureMapSpec, embed_batch
from vqkmeans.quantum import (
    ShapeError,
    Statevector,
    amplitude_estimation_distribution,
    kernel_from_p0,
)


class EmptyClusterError(ValueError):
    pass


def as_state_array(states) -> np.ndarray:
    if isinstance(states, np.ndarray):
        arr = states
    else:
        arr = np.array([s.amplitudes if isinstance(s, Statevector) else s for s in states])
    arr = np.asarray(arr, dtype=complex)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ShapeError(f"expected a stack of statevectors, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class EstimationMode:
    """How kernel values are obtained: ``exact``, ``shots`` or ``amplitude_estimation``."""

    kind: str = "exact"
    shots: Optional[int] = None
    P: Optional[int] = None

    def __post_init__(self):
        if self.kind == "exact":
            return
        if self.kind == "shots":
            if not self.shots or self.shots < 1:
                raise ValueError(f"shots mode needs a positive shot count, got {self.shots}")
        elif self.kind == "amplitude_estimation":
            if not self.P or self.P < 2:
                raise ValueError(f"amplitude estimation needs P >= 2, got {self.P}")
        else:
            raise ValueError(f"unknown estimation mode {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "EstimationMode":
        """Parse ``exact``, ``shots:N`` or ``ae:P``."""
        name, _, arg = text.partition(":")
        if name == "exact":
            return cls()
        if name == "shots":
            return cls("shots", shots=int(arg))
        if name in ("ae", "amplitude_estimation"):
            return cls("amplitude_estimation", P=int(arg))
        raise ValueError(f"cannot parse estimation mode {text!r}")

    def __str__(self):
        if self.kind == "shots":
            return f"shots:{self.shots}"
        if self.kind == "amplitude_estimation":
            return f"ae:{self.P}"
        return "exact"


@dataclass(frozen=True)
class ClusterConfig:
    k: int = 2
    eps3: float = 1e-4
    max_iterations: int = 50
    estimation_mode: EstimationMode = field(default_factory=EstimationMode)
    seed: int = 0
    # "data_mean": re-embed the data-space member mean; "feature_state": use the
    # characteristic state itself as the centroid state
    centroid_mode: str = "data_mean"

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"k must be >= 2, got {self.k}")
        if not self.eps3 > 0:
            raise ValueError(f"eps3 must be positive, got {self.eps3}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be positive, got {self.max_iterations}")
        if self.centroid_mode not in ("data_mean", "feature_state"):
            raise ValueError(f"unknown centroid_mode {self.centroid_mode!r}")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "eps3": self.eps3,
            "max_iterations": self.max_iterations,
            "estimation_mode": str(self.estimation_mode),
            "seed": self.seed,
            "centroid_mode": self.centroid_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClusterConfig":
        d = dict(d)
        if isinstance(d.get("estimation_mode"), str):
            d["estimation_mode"] = EstimationMode.parse(d["estimation_mode"])
        return cls(**d)


@dataclass
class ClusterModel:
    centroids_data: np.ndarray
    centroid_states: np.ndarray
    labels: np.ndarray
    characteristic_states: np.ndarray
    gram: np.ndarray
    iterations_run: int
    converged: bool
    events: list = field(default_factory=list)


def kmeans_pp_init(data, k: int, seed: int) -> np.ndarray:
    """k-means++ seeding: D^2-weighted sampling of ``k`` data points."""
    data = np.asarray(data, dtype=float)
    N = len(data)
    if not 1 <= k <= N:
        raise ValueError(f"k must be in [1, N={N}], got {k}")
    rng = make_rng(seed, 10)
    chosen = [int(rng.integers(N))]
    d2 = np.sum((data - data[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(N, p=d2 / total))
        else:
            # all remaining points coincide with chosen centroids
            idx = int(rng.choice(np.setdiff1d(np.arange(N), chosen)))
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((data - data[idx]) ** 2, axis=1))
    return data[chosen].copy()


def exact_kernel(points, centroid_states) -> np.ndarray:
    X = as_state_array(points)
    C = as_state_array(centroid_states)
    if X.shape[1] != C.shape[1]:
        raise ShapeError(f"register sizes differ: {X.shape[1]} vs {C.shape[1]}")
    return np.clip(np.abs(X.conj() @ C.T) ** 2, 0.0, 1.0)


def kernel_matrix(points, centroid_states, mode: EstimationMode = EstimationMode(), seed: int = 0) -> np.ndarray:
    """N x k kernel values |<x_i|c_j>|^2, exact or estimated.

    Estimated entries use the swap-test ancilla probability p0 = (1 + K)/2,
    sampled per entry from a stream keyed by ``(seed, i, j)``.
    """
    K = exact_kernel(points, centroid_states)
    if mode.kind == "exact":
        return K
    p0 = np.clip((1.0 + K) / 2.0, 0.0, 1.0)
    out = np.empty_like(K)
    N, k = K.shape
    for i in range(N):
        for j in range(k):
            rng = make_rng(seed, i, j)
            if mode.kind == "shots":
                p_hat = rng.binomial(mode.shots, p0[i, j]) / mode.shots
            else:
                probs = amplitude_estimation_distribution(p0[i, j], mode.P)
                y = rng.choice(mode.P, p=probs)
                p_hat = np.sin(np.pi * y / mode.P) ** 2
            out[i, j] = kernel_from_p0(p_hat)
    return out


def assign_labels(gram) -> np.ndarray:
    """Row-wise argmax; ties go to the smallest cluster index."""
    gram = np.asarray(gram, dtype=float)
    if gram.size == 0:
        raise ValueError("gram matrix is empty")
    return np.argmax(gram, axis=1)


def characteristic_state(points, labels, j: int) -> Statevector:
    """Normalized sum of the member states of cluster ``j``."""
    return Statevector(_characteristic_array(as_state_array(points), np.asarray(labels), j))


def _characteristic_array(X: np.ndarray, labels: np.ndarray, j: int) -> np.ndarray:
    members = X[labels == j]
    if len(members) == 0:
        raise EmptyClusterError(f"cluster {j} has no members")
    s = members.sum(axis=0)
    norm = np.linalg.norm(s)
    if norm < 1e-12:
        raise EmptyClusterError(f"member states of cluster {j} cancel to the zero vector")
    return s / norm


def characteristic_states(points, labels, k: int) -> np.ndarray:
    X = as_state_array(points)
    labels = np.asarray(labels)
    return np.array([_characteristic_array(X, labels, j) for j in range(k)])


def update_centroids(data, labels, k: int, previous=None) -> np.ndarray:
    """Member means in data space.

    An empty cluster is reseeded to the point farthest from its nearest
    centroid among those already placed.
    """
    data = np.asarray(data, dtype=float)
    labels = np.asarray(labels)
    centroids = np.zeros((k, data.shape[1]))
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    for j in range(k):
        if counts[j]:
            centroids[j] = data[labels == j].mean(axis=0)
    placed = [j for j in range(k) if counts[j]]
    for j in empty:
        if placed:
            ref = centroids[placed]
        elif previous is not None:
            ref = np.asarray(previous, dtype=float)
        else:
            ref = data.mean(axis=0, keepdims=True)
        d2 = ((data[:, None, :] - ref[None]) ** 2).sum(-1).min(axis=1)
        centroids[j] = data[int(np.argmax(d2))]
        placed.append(j)
    return centroids


def qmeans_run(data, theta, spec: FeatureMapSpec, config: ClusterConfig, points=None) -> ClusterModel:
    """Alternate kernel labelling and centroid updates until centroids settle.

    ``points`` may carry precomputed embeddings of ``data``.
    """
    data = np.asarray(data, dtype=float)
    if len(data) == 0:
        raise ValueError("data is empty")
    k = config.k
    X = embed_batch(data, theta, spec) if points is None else as_state_array(points)
    centroids = kmeans_pp_init(data, k, config.seed)
    centroid_states = embed_batch(centroids, theta, spec)
    events = []
    converged = False
    iterations = 0
    labels = gram = None
    while iterations < config.max_iterations:
        gram = kernel_matrix(X, centroid_states, config.estimation_mode,
                             seed=_iteration_seed(config.seed, iterations))
        labels = assign_labels(gram)
        iterations += 1
        counts = np.bincount(labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            events.append({"iteration": iterations, "event": "empty_cluster_reseed", "cluster": int(j)})
        new_centroids = update_centroids(data, labels, k, previous=centroids)
        shift = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if config.centroid_mode == "feature_state":
            centroid_states = _feature_centroids(X, labels, centroids, theta, spec, k)
        else:
            centroid_states = embed_batch(centroids, theta, spec)
        if shift < config.eps3:
            converged = True
            break
    chi = []
    for j in range(k):
        try:
            chi.append(_characteristic_array(X, labels, j))
        except EmptyClusterError:
            events.append({"iteration": iterations, "event": "empty_final_cluster", "cluster": j})
            chi.append(centroid_states[j])
    return ClusterModel(
        centroids_data=centroids,
        centroid_states=centroid_states,
        labels=labels,
        characteristic_states=np.array(chi),
        gram=gram,
        iterations_run=iterations,
        converged=converged,
        events=events,
    )


def _feature_centroids(X, labels, centroids, theta, spec, k):
    out = []
    for j in range(k):
        try:
            out.append(_characteristic_array(X, labels, j))
        except EmptyClusterError:
            out.append(embed_batch(centroids[j], theta, spec)[0])
    return np.array(out)


def _iteration_seed(seed: int, iteration: int) -> int:
    return int(make_rng(seed, 11, iteration).integers(2**62))


def permutation_accuracy(true_labels, pred_labels, k: Optional[int] = None) -> float:
    """Best accuracy over all relabellings of the predicted clusters."""
    true_labels = np.asarray(true_labels)
    pred_labels = np.asarray(pred_labels)
    if k is None:
        k = int(max(true_labels.max(), pred_labels.max())) + 1
    best = 0.0
    for perm in permutations(range(k)):
        mapped = np.asarray(perm)[pred_labels]
        best = max(best, float(np.mean(mapped == true_labels)))
    return best
