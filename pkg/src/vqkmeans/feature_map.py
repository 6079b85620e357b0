"""Quantum feature maps turning 2-D points into statevectors.

Two maps are provided:

* ``qaoa_embedding`` -- trainable. Each of ``n_layers`` layers applies
  RX(x_w) to every wire w (angle 0 on wires beyond the feature count), a
  ZZ(theta) entangler (a single ZZ(0, 1) for two qubits, the ring
  ZZ(w, w+1 mod n) otherwise) and RY(theta) on every wire. With
  ``trailing_encoding`` one more RX(x) layer closes the circuit (the
  PennyLane ``QAOAEmbedding`` wiring); by default there is none. Parameters
  are stored layer-major, each layer as ``[zz..., ry...]``.
* ``havlicek`` -- fixed, two qubits: ``U_phi H H U_phi H H |00>`` with
  ``U_phi = exp(i (x1 Z1 + x2 Z2 + (pi - x1)(pi - x2) Z1 Z2))``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from vqkmeans._seeding import make_rng
from vqkmeans.quantum import (
    MAX_QUBITS,
    CapacityError,
    Gate,
    ShapeError,
    Statevector,
    _gate_matrix,
    apply_matrix,
    new_zero_state,
    run_circuit,
)

KINDS = ("qaoa_embedding", "havlicek")


class UnsupportedSpecError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureMapSpec:
    kind: str = "qaoa_embedding"
    n_qubits: int = 2
    n_layers: int = 4
    feature_dim: int = 2
    trailing_encoding: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature map kind {self.kind!r}; expected one of {KINDS}")
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise CapacityError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if self.n_layers < 1:
            raise ValueError(f"n_layers must be positive, got {self.n_layers}")
        if not 1 <= self.feature_dim <= self.n_qubits:
            raise ValueError(f"feature_dim must be in [1, n_qubits={self.n_qubits}], got {self.feature_dim}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureMapSpec":
        return cls(**{k: d[k] for k in ("kind", "n_qubits", "n_layers", "feature_dim", "trailing_encoding") if k in d})


def _zz_pairs(n_qubits: int) -> list:
    if n_qubits == 1:
        return []
    if n_qubits == 2:
        return [(0, 1)]
    return [(w, (w + 1) % n_qubits) for w in range(n_qubits)]


def params_per_layer(spec: FeatureMapSpec) -> int:
    if spec.kind == "havlicek":
        return 0
    return len(_zz_pairs(spec.n_qubits)) + spec.n_qubits


def param_count(spec: FeatureMapSpec) -> int:
    """Number of trainable angles; 3 per layer for two qubits, 2n per layer above that."""
    return params_per_layer(spec) * spec.n_layers if spec.kind == "qaoa_embedding" else 0


def check_theta(theta, spec: FeatureMapSpec) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (param_count(spec),):
        raise ShapeError(f"theta must have shape ({param_count(spec)},), got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta contains non-finite entries")
    return theta


def _check_points(x, spec: FeatureMapSpec) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.feature_dim:
        raise ShapeError(f"points must have {spec.feature_dim} features, got {x.shape[-1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input point contains non-finite values")
    return x


def init_theta(spec: FeatureMapSpec, seed: int, scale: float = math.pi) -> np.ndarray:
    """Draw i.i.d. uniform(-scale, scale) parameters; the default covers a full period."""
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    return make_rng(seed).uniform(-scale, scale, size=param_count(spec))


def circuit_gates(x, theta, spec: FeatureMapSpec) -> list:
    """The ordered gate list that prepares the embedded state of ``x``."""
    x = _check_points(x, spec)
    if spec.kind == "havlicek":
        return _havlicek_gates(x, spec)
    theta = check_theta(theta, spec)
    n = spec.n_qubits
    pairs = _zz_pairs(n)
    angles = np.zeros(n)
    angles[: spec.feature_dim] = x
    gates = []
    for layer in theta.reshape(spec.n_layers, -1):
        gates += [Gate("RX", w, angles[w]) for w in range(n)]
        gates += [Gate("ZZ", pair, a) for pair, a in zip(pairs, layer)]
        gates += [Gate("RY", w, a) for w, a in enumerate(layer[len(pairs):])]
    if spec.trailing_encoding:
        gates += [Gate("RX", w, angles[w]) for w in range(n)]
    return gates


def embed(x, theta, spec: FeatureMapSpec) -> Statevector:
    """Embed one point by applying its gate list to |0...0>."""
    if spec.kind == "havlicek":
        return havlicek_embed(x, spec)
    return run_circuit(new_zero_state(spec.n_qubits), circuit_gates(x, theta, spec))


def _havlicek_phases(x) -> tuple:
    x1, x2 = x
    return x1, x2, (math.pi - x1) * (math.pi - x2)


def _havlicek_gates(x, spec: FeatureMapSpec) -> list:
    if spec.n_qubits != 2:
        raise UnsupportedSpecError(f"havlicek map is implemented for 2 qubits, got {spec.n_qubits}")
    p1, p2, p12 = _havlicek_phases(x)
    # exp(i phi G) == R_G(-2 phi) in the exp(-i angle G / 2) convention
    phase = [Gate("RZ", 0, -2 * p1), Gate("RZ", 1, -2 * p2), Gate("ZZ", (0, 1), -2 * p12)]
    hadamards = [Gate("H", 0), Gate("H", 1)]
    return (hadamards + phase) * 2


def havlicek_embed(x, spec: FeatureMapSpec) -> Statevector:
    if spec.n_qubits != 2 or spec.feature_dim != 2:
        raise UnsupportedSpecError(
            f"havlicek map is implemented for 2 qubits and 2 features, got {spec.n_qubits}/{spec.feature_dim}"
        )
    return run_circuit(new_zero_state(2), _havlicek_gates(_check_points(x, spec), spec))


# Batched path used in training: all N points at once, one gate layer at a time.


def _rx_batch(angles: np.ndarray) -> np.ndarray:
    c, s = np.cos(angles / 2), np.sin(angles / 2)
    m = np.empty(angles.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = c
    m[..., 1, 1] = c
    m[..., 0, 1] = -1j * s
    m[..., 1, 0] = -1j * s
    return m


def _zz_diagonal(n: int, pair, angle: float) -> np.ndarray:
    idx = np.arange(1 << n)
    za = 1 - 2 * ((idx >> (n - 1 - pair[0])) & 1)
    zb = 1 - 2 * ((idx >> (n - 1 - pair[1])) & 1)
    return np.exp(-0.5j * angle * za * zb)


def embed_batch(points, theta, spec: FeatureMapSpec) -> np.ndarray:
    """Embed every row of ``points``; returns an ``(N, 2**n_qubits)`` array.

    Row i equals ``embed(points[i], theta, spec).amplitudes``.
    """
    points = np.atleast_2d(_check_points(points, spec))
    if spec.kind == "havlicek":
        return np.array([havlicek_embed(p, spec).amplitudes for p in points])
    theta = check_theta(theta, spec)
    n = spec.n_qubits
    N = points.shape[0]
    pairs = _zz_pairs(n)
    psi = np.zeros((N, 1 << n), dtype=complex)
    psi[:, 0] = 1.0
    rx = [_rx_batch(points[:, w]) if w < spec.feature_dim else None for w in range(n)]
    for layer in theta.reshape(spec.n_layers, -1):
        for w in range(n):
            if rx[w] is not None:
                psi = apply_matrix(psi, rx[w], [w])
        diag = np.ones(1 << n, dtype=complex)
        for pair, a in zip(pairs, layer):
            diag = diag * _zz_diagonal(n, pair, a)
        psi = psi * diag
        for w, a in enumerate(layer[len(pairs):]):
            psi = apply_matrix(psi, _gate_matrix("RY", a), [w])
    if spec.trailing_encoding:
        for w in range(n):
            if rx[w] is not None:
                psi = apply_matrix(psi, rx[w], [w])
    return psi
