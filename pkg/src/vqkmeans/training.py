"""Inter-cluster overlap costs, gradients and the RMSProp training loop."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from vqkmeans.clustering import (
    ClusterConfig,
    EmptyClusterError,
    as_state_array,
    characteristic_states,
    qmeans_run,
)
from vqkmeans.feature_map import FeatureMapSpec, check_theta, embed_batch, init_theta
from vqkmeans.quantum import ShapeError

PARAMETER_SHIFT = math.pi / 2
COSTS = ("hilbert_schmidt", "state_overlap")


class NumericalError(FloatingPointError):
    pass


def _fidelities(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if A.shape[1] != B.shape[1]:
        raise ShapeError(f"register sizes differ: {A.shape[1]} vs {B.shape[1]}")
    return np.abs(A.conj() @ B.T) ** 2


def overlap_matrix(states) -> np.ndarray:
    """k x k matrix of squared overlaps between characteristic states."""
    S = as_state_array(states)
    M = _fidelities(S, S)
    M = 0.5 * (M + M.T)
    np.fill_diagonal(M, 1.0)
    return M


def cost_state_overlap(M) -> float:
    """Sum of M over ordered pairs j != j' (each unordered pair counts twice)."""
    M = np.asarray(M, dtype=float)
    return float(M.sum() - np.trace(M))


def hs_distance(cluster_a, cluster_b) -> float:
    """0.5 tr(rho_A^2) + 0.5 tr(rho_B^2) - tr(rho_A rho_B) for uniform ensembles.

    This equals half the squared Hilbert-Schmidt norm of ``rho_A - rho_B``.
    """
    A = as_state_array(cluster_a)
    B = as_state_array(cluster_b)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("both clusters must be nonempty")
    aa = _fidelities(A, A).mean()
    bb = _fidelities(B, B).mean()
    ab = _fidelities(A, B).mean()
    return float(0.5 * aa + 0.5 * bb - ab)


def _cluster_members(labels, k):
    labels = np.asarray(labels)
    members = [np.flatnonzero(labels == j) for j in range(k)]
    for j, idx in enumerate(members):
        if len(idx) == 0:
            raise EmptyClusterError(f"cluster {j} has no members")
    return members


def hs_weights(labels, k: int):
    """Weights W and offset c with ``cost_hilbert_schmidt = c + sum(W * F)``.

    F is the N x N matrix of pairwise fidelities between embedded points.
    """
    labels = np.asarray(labels)
    members = _cluster_members(labels, k)
    sizes = np.array([len(m) for m in members], dtype=float)
    # intra-cluster blocks: cluster j appears in k-1 pairs, each with -1/2 tr(rho_j^2)
    row = -0.5 * (k - 1) / sizes[labels] ** 2
    W = np.where(labels[:, None] == labels[None, :], row[:, None], 0.0)
    for a in range(k):
        for b in range(a + 1, k):
            W[np.ix_(members[a], members[b])] = 1.0 / (sizes[a] * sizes[b])
    return W, k * (k - 1) / 2


def cost_hilbert_schmidt(points, labels, k: int) -> float:
    """Sum over unordered cluster pairs of ``1 - hs_distance``."""
    X = as_state_array(points)
    members = _cluster_members(labels, k)
    total = 0.0
    for a in range(k):
        for b in range(a + 1, k):
            total += 1.0 - hs_distance(X[members[a]], X[members[b]])
    return total


def evaluate_cost(points, labels, k: int, cost: str = "hilbert_schmidt") -> float:
    if cost == "hilbert_schmidt":
        return cost_hilbert_schmidt(points, labels, k)
    if cost == "state_overlap":
        return cost_state_overlap(overlap_matrix(characteristic_states(points, labels, k)))
    raise ValueError(f"unknown cost {cost!r}; expected one of {COSTS}")


class FidelityObjective:
    """An objective ``c + sum_ij W_ij |<a_i|b_j>|^2`` over embedded points.

    ``bra_data`` and ``ket_data`` are embedded with separate parameter vectors
    in :meth:`split`; the objective itself is ``split(theta, theta)``. When
    ``ket_data`` is None it defaults to ``bra_data``. ``fixed_bra`` replaces
    the bra side with constant states.
    """

    def __init__(self, spec: FeatureMapSpec, weights, offset: float = 0.0,
                 bra_data=None, ket_data=None, fixed_bra=None):
        self.spec = spec
        self.weights = np.asarray(weights, dtype=float)
        self.offset = float(offset)
        self.bra_data = None if bra_data is None else np.asarray(bra_data, dtype=float)
        self.ket_data = self.bra_data if ket_data is None else np.asarray(ket_data, dtype=float)
        self.fixed_bra = None if fixed_bra is None else as_state_array(fixed_bra)

    def _bra(self, theta):
        if self.fixed_bra is not None:
            return self.fixed_bra
        return embed_batch(self.bra_data, theta, self.spec)

    def split(self, theta_bra, theta_ket) -> float:
        F = _fidelities(self._bra(theta_bra), embed_batch(self.ket_data, theta_ket, self.spec))
        return self.offset + float(np.sum(self.weights * F))

    def __call__(self, theta) -> float:
        if self.fixed_bra is None and self.ket_data is self.bra_data:
            X = embed_batch(self.bra_data, theta, self.spec)
            return self.offset + float(np.sum(self.weights * _fidelities(X, X)))
        return self.split(theta, theta)


def hilbert_schmidt_objective(data, labels, k: int, spec: FeatureMapSpec) -> FidelityObjective:
    W, offset = hs_weights(labels, k)
    return FidelityObjective(spec, W, offset, bra_data=data)


def state_overlap_objective(data, labels, k: int, spec: FeatureMapSpec) -> Callable:
    labels = np.asarray(labels)
    _cluster_members(labels, k)

    def objective(theta):
        return evaluate_cost(embed_batch(data, theta, spec), labels, k, "state_overlap")

    return objective


def build_objective(data, labels, k: int, spec: FeatureMapSpec, cost: str = "hilbert_schmidt"):
    if cost == "hilbert_schmidt":
        return hilbert_schmidt_objective(data, labels, k, spec)
    if cost == "state_overlap":
        return state_overlap_objective(data, labels, k, spec)
    raise ValueError(f"unknown cost {cost!r}; expected one of {COSTS}")


def _finite(value, coord):
    if not np.isfinite(value):
        raise NumericalError(f"objective is not finite at coordinate {coord}")
    return value


def gradient(objective, theta, method: str = "finite_difference", h: float = 1e-3) -> np.ndarray:
    """Gradient of ``objective`` at ``theta``.

    ``finite_difference`` uses central differences with step ``h``.
    ``parameter_shift`` needs a :class:`FidelityObjective`: every angle enters
    one gate per circuit, on both the bra and the ket side, and each side gets
    its own +-pi/2 shift (product rule).
    """
    theta = np.asarray(theta, dtype=float)
    grad = np.zeros_like(theta)
    if method == "finite_difference":
        if not h > 0:
            raise ValueError(f"finite-difference step must be positive, got {h}")
        for i in range(theta.size):
            e = np.zeros_like(theta)
            e[i] = h
            up = _finite(objective(theta + e), i)
            down = _finite(objective(theta - e), i)
            grad[i] = (up - down) / (2 * h)
        return grad
    if method == "parameter_shift":
        split = getattr(objective, "split", None)
        if split is None:
            raise TypeError("parameter_shift needs an objective built from pairwise fidelities")
        two_sided = getattr(objective, "fixed_bra", None) is None
        for i in range(theta.size):
            e = np.zeros_like(theta)
            e[i] = PARAMETER_SHIFT
            g = _finite(split(theta, theta + e), i) - _finite(split(theta, theta - e), i)
            if two_sided:
                g += _finite(split(theta + e, theta), i) - _finite(split(theta - e, theta), i)
            grad[i] = 0.5 * g
        return grad
    raise ValueError(f"unknown gradient method {method!r}")


def rmsprop_step(theta, grad, acc, step_size: float = 0.1, decay: float = 0.9, epsilon: float = 1e-8):
    """One RMSProp update; returns ``(new_theta, new_accumulator)``."""
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    acc = np.asarray(acc, dtype=float)
    if not theta.shape == grad.shape == acc.shape:
        raise ShapeError(f"shape mismatch: theta {theta.shape}, grad {grad.shape}, acc {acc.shape}")
    acc = decay * acc + (1.0 - decay) * grad**2
    return theta - step_size * grad / (np.sqrt(acc) + epsilon), acc


@dataclass(frozen=True)
class TrainConfig:
    step_size: float = 0.1
    eps4: float = 1e-6
    max_epochs: int = 300
    label_mode: str = "supervised"
    grad_method: str = "finite_difference"
    fd_step: float = 1e-3
    rms_decay: float = 0.9
    rms_epsilon: float = 1e-8
    cost: str = "hilbert_schmidt"
    init_scale: float = math.pi
    seed: int = 0

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if not self.eps4 > 0:
            raise ValueError(f"eps4 must be positive, got {self.eps4}")
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be non-negative, got {self.max_epochs}")
        if self.label_mode not in ("supervised", "alternating"):
            raise ValueError(f"unknown label_mode {self.label_mode!r}")
        if self.grad_method not in ("finite_difference", "parameter_shift"):
            raise ValueError(f"unknown grad_method {self.grad_method!r}")
        if not 0 < self.rms_decay < 1:
            raise ValueError(f"rms_decay must be in (0, 1), got {self.rms_decay}")
        if not self.rms_epsilon > 0:
            raise ValueError(f"rms_epsilon must be positive, got {self.rms_epsilon}")
        if self.cost not in COSTS:
            raise ValueError(f"unknown cost {self.cost!r}; expected one of {COSTS}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclass
class EpochRecord:
    epoch: int
    cost: float
    grad_norm: float
    elapsed_ms: float
    events: list = field(default_factory=list)


@dataclass
class TrainingTrace:
    records: list
    initial_theta: np.ndarray
    theta: np.ndarray
    converged: bool
    cost: str

    @property
    def costs(self) -> np.ndarray:
        return np.array([r.cost for r in self.records])

    @property
    def min_cost(self) -> float:
        return float(self.costs.min())

    @property
    def argmin_epoch(self) -> int:
        return int(self.records[int(np.argmin(self.costs))].epoch)

    @property
    def best_theta(self) -> np.ndarray:
        return self._thetas[int(np.argmin(self.costs))]

    _thetas: list = field(default_factory=list, repr=False)


def _epoch_labels(data, truth, theta, spec, cluster_config, config, epoch):
    if config.label_mode == "supervised":
        return truth, []
    cc = ClusterConfig(**{**cluster_config.__dict__, "seed": cluster_config.seed + 7919 * epoch})
    model = qmeans_run(data, theta, spec, cc)
    labels = model.labels
    events = [{"event": "qmeans", "iterations": model.iterations_run, "converged": model.converged}]
    events += model.events
    present = np.unique(labels)
    if len(present) < cluster_config.k:
        # costs need nonempty clusters; relabel onto the occupied ones
        labels = np.searchsorted(present, labels)
        events.append({"event": "dropped_empty_clusters", "kept": len(present)})
    return labels, events


def train(data, labels, spec: FeatureMapSpec, cluster_config: ClusterConfig,
          config: TrainConfig, theta0=None) -> TrainingTrace:
    """Minimize the inter-cluster overlap cost over the feature-map angles.

    Epoch 0 records the cost at the initial angles. Every later epoch applies
    one RMSProp step. Training stops once the cost changes by less than
    ``eps4`` between consecutive epochs or after ``max_epochs`` steps.
    """
    data = np.asarray(data, dtype=float)
    truth = None
    if config.label_mode == "supervised":
        if labels is None:
            raise ValueError("supervised training needs ground-truth labels")
        truth = np.asarray(labels, dtype=int)
    theta = init_theta(spec, config.seed, config.init_scale) if theta0 is None else check_theta(theta0, spec).copy()
    initial = theta.copy()
    acc = np.zeros_like(theta)
    records, thetas = [], []
    prev_cost = None
    converged = False
    for epoch in range(config.max_epochs + 1):
        start = time.perf_counter()
        ep_labels, events = _epoch_labels(data, truth, theta, spec, cluster_config, config, epoch)
        k = int(ep_labels.max()) + 1
        objective = build_objective(data, ep_labels, k, spec, config.cost)
        value = float(objective(theta))
        if not np.isfinite(value):
            raise NumericalError(f"cost is not finite at epoch {epoch}")
        grad = gradient(objective, theta, config.grad_method, config.fd_step)
        elapsed = (time.perf_counter() - start) * 1e3
        records.append(EpochRecord(epoch, value, float(np.linalg.norm(grad)), elapsed, events))
        thetas.append(theta.copy())
        if prev_cost is not None and abs(value - prev_cost) < config.eps4:
            converged = True
            break
        if epoch == config.max_epochs:
            break
        theta, acc = rmsprop_step(theta, grad, acc, config.step_size, config.rms_decay, config.rms_epsilon)
        prev_cost = value
    return TrainingTrace(records, initial, theta, converged, config.cost, _thetas=thetas)
