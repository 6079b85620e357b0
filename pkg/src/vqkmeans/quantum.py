"""Exact statevector simulation for the feature-map and swap-test circuits.

Qubit 0 is the most significant bit of the basis index, so for two qubits
the amplitudes are ordered |00>, |01>, |10>, |11>.

Rotations follow ``R_G(phi) = exp(-i phi G / 2)`` for G in {X, Y, Z, Z⊗Z}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from vqkmeans._seeding import make_rng

MAX_QUBITS = 24
NORM_TOL = 1e-10

GATE_ARITY = {"H": 1, "RX": 1, "RY": 1, "RZ": 1, "ZZ": 2, "CNOT": 2, "CSWAP": 3}
ROTATIONS = frozenset({"RX", "RY", "RZ", "ZZ"})


class CapacityError(ValueError):
    """Requested register is larger than the simulator allows."""


class ShapeError(ValueError):
    """Register sizes or array shapes are incompatible."""


@dataclass(frozen=True, eq=False)
class Statevector:
    """Normalized pure state of ``n_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise ShapeError(f"amplitudes must be 1-D, got shape {amps.shape}")
        n = amps.size.bit_length() - 1
        if amps.size < 2 or amps.size != 1 << n:
            raise ShapeError(f"amplitude count {amps.size} is not a power of two >= 2")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def from_array(cls, amplitudes, normalize: bool = False) -> "Statevector":
        amps = np.asarray(amplitudes, dtype=complex)
        if normalize:
            amps = amps / np.linalg.norm(amps)
        return cls(amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __repr__(self):
        return f"Statevector(n_qubits={self.n_qubits}, amplitudes={np.array2string(self.amplitudes, precision=4)})"


@dataclass(frozen=True)
class Gate:
    """One gate of the supported alphabet.

    ``qubits`` lists control(s) first: CNOT is (control, target) and CSWAP is
    (control, a, b).
    """

    kind: str
    qubits: tuple
    angle: Optional[float] = None

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in np.atleast_1d(self.qubits))
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != GATE_ARITY[self.kind]:
            raise ValueError(f"{self.kind} acts on {GATE_ARITY[self.kind]} qubit(s), got {qubits}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"repeated qubit index in {qubits}")
        if (self.kind in ROTATIONS) != (self.angle is not None):
            raise ValueError(f"angle must be given exactly for rotation gates, got {self.kind} angle={self.angle}")
        if self.angle is not None:
            object.__setattr__(self, "angle", float(self.angle))

    def inverse(self) -> "Gate":
        if self.kind in ROTATIONS:
            return Gate(self.kind, self.qubits, -self.angle)
        return self

    def matrix(self) -> np.ndarray:
        """Dense unitary on the gate's own qubits, first listed qubit most significant."""
        return _gate_matrix(self.kind, self.angle)


_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _gate_matrix(kind: str, angle: Optional[float]) -> np.ndarray:
    if kind == "H":
        return _H
    if kind in ("RX", "RY", "RZ"):
        c, s = math.cos(angle / 2), math.sin(angle / 2)
        if kind == "RX":
            return np.array([[c, -1j * s], [-1j * s, c]])
        if kind == "RY":
            return np.array([[c, -s], [s, c]], dtype=complex)
        return np.diag([complex(c, -s), complex(c, s)])
    if kind == "ZZ":
        lo, hi = np.exp(-0.5j * angle), np.exp(0.5j * angle)
        return np.diag([lo, hi, hi, lo])
    if kind == "CNOT":
        m = np.eye(4, dtype=complex)
        m[[2, 3]] = m[[3, 2]]
        return m
    m = np.eye(8, dtype=complex)  # CSWAP: swap |101> and |110>
    m[[5, 6]] = m[[6, 5]]
    return m


def apply_matrix(amplitudes: np.ndarray, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Apply a k-qubit matrix to ``qubits`` of a batch of state arrays.

    ``amplitudes`` has shape ``(..., 2**n)``. ``matrix`` is either ``(2**k, 2**k)``
    or batched as ``(..., 2**k, 2**k)`` with the same leading shape.
    """
    amplitudes = np.asarray(amplitudes)
    batch = amplitudes.shape[:-1]
    n = amplitudes.shape[-1].bit_length() - 1
    k = len(qubits)
    nb = len(batch)
    psi = amplitudes.reshape(batch + (2,) * n)
    axes = [nb + q for q in qubits]
    psi = np.moveaxis(psi, axes, list(range(nb, nb + k)))
    moved = psi.shape
    psi = psi.reshape(batch + (1 << k, -1))
    psi = np.matmul(matrix, psi)
    psi = np.moveaxis(psi.reshape(moved), list(range(nb, nb + k)), axes)
    return psi.reshape(batch + (1 << n,))


def new_zero_state(n_qubits: int) -> Statevector:
    """Return |0...0> on ``n_qubits`` qubits."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1.0
    return Statevector(amps)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    n = state.n_qubits
    bad = [q for q in gate.qubits if not 0 <= q < n]
    if bad:
        raise IndexError(f"qubit index {bad[0]} out of range for {n}-qubit state")
    return Statevector(apply_matrix(state.amplitudes, gate.matrix(), gate.qubits))


def run_circuit(state: Statevector, gates) -> Statevector:
    for gate in gates:
        state = apply_gate(state, gate)
    return state


def _check_pair(a: Statevector, b: Statevector):
    if a.n_qubits != b.n_qubits:
        raise ShapeError(f"register sizes differ: {a.n_qubits} vs {b.n_qubits}")


def fidelity(a: Statevector, b: Statevector) -> float:
    """Squared overlap |<a|b>|^2."""
    _check_pair(a, b)
    f = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(min(f, 1.0))


def swap_test_circuit(n: int) -> list:
    """Gate list of the swap test on registers of ``n`` qubits.

    Layout: ancilla is qubit 0, the first register qubits 1..n, the second
    register qubits n+1..2n.
    """
    gates = [Gate("H", 0)]
    gates += [Gate("CSWAP", (0, 1 + w, 1 + n + w)) for w in range(n)]
    gates.append(Gate("H", 0))
    return gates


def swap_test_probability(a: Statevector, b: Statevector) -> float:
    """Ancilla-zero probability of the swap test on ``a`` and ``b``.

    The full ancilla + CSWAP + Hadamard circuit is simulated; the result
    equals ``(1 + fidelity(a, b)) / 2``.
    """
    _check_pair(a, b)
    n = a.n_qubits
    if 2 * n + 1 > MAX_QUBITS:
        raise CapacityError(f"swap test on {n}-qubit registers needs {2 * n + 1} qubits")
    joint = np.kron(np.array([1.0, 0.0]), np.kron(a.amplitudes, b.amplitudes))
    out = run_circuit(Statevector(joint), swap_test_circuit(n))
    half = out.dim // 2
    return float(np.sum(np.abs(out.amplitudes[:half]) ** 2))


@dataclass(frozen=True)
class SwapTestEstimate:
    p0_hat: float
    shots: int
    mode: str

    @property
    def kernel_hat(self) -> float:
        return kernel_from_p0(self.p0_hat)


def kernel_from_p0(p0: float) -> float:
    """Invert p0 = (1 + K)/2, clipping shot noise below zero."""
    return max(0.0, 2.0 * p0 - 1.0)


def exact_swap_test(a: Statevector, b: Statevector) -> SwapTestEstimate:
    return SwapTestEstimate(swap_test_probability(a, b), 0, "exact")


def _sample_p0(p0: float, shots: int, rng: np.random.Generator) -> float:
    p0 = min(max(p0, 0.0), 1.0)
    return rng.binomial(shots, p0) / shots


def sample_swap_test(a: Statevector, b: Statevector, shots: int, seed: int) -> SwapTestEstimate:
    """Estimate the ancilla-zero probability from ``shots`` simulated measurements."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p0 = swap_test_probability(a, b)
    return SwapTestEstimate(_sample_p0(p0, shots, make_rng(seed)), int(shots), "shots")


def amplitude_estimation_distribution(p0: float, P: int) -> np.ndarray:
    """Outcome distribution over y in {0..P-1} of amplitude estimation with P iterations.

    The phase register sees the two eigenphases +-theta_a/pi of the Grover
    iterate, with sin^2(theta_a) = p0, each with weight 1/2. Each contributes
    the Fejer kernel |sum_t exp(2 pi i t (omega - y/P))|^2 / P^2.
    """
    if P < 2:
        raise ValueError(f"P must be >= 2, got {P}")
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"p0 must lie in [0, 1], got {p0}")
    omega = math.asin(math.sqrt(p0)) / math.pi
    t = np.arange(P)
    y = np.arange(P)[:, None]
    probs = np.zeros(P)
    for w in (omega, -omega):
        amp = np.exp(2j * np.pi * t * (w - y / P)).sum(axis=1) / P
        probs += 0.5 * np.abs(amp) ** 2
    probs[probs < 1e-15] = 0.0  # rounding residue of exactly-cancelling sums
    return probs / probs.sum()


def amplitude_estimation_sample(p0: float, P: int, seed: int) -> float:
    """Draw one amplitude-estimation output ``sin^2(pi y / P)``."""
    probs = amplitude_estimation_distribution(p0, P)
    y = make_rng(seed).choice(P, p=probs)
    return math.sin(math.pi * y / P) ** 2


def amplitude_estimation_bound(p0: float, P: int) -> float:
    """Error bound that amplitude estimation meets with probability >= 8/pi^2."""
    return 2 * math.pi * math.sqrt(p0 * (1 - p0)) / P + (math.pi / P) ** 2


def amplitude_estimation_swap_test(a: Statevector, b: Statevector, P: int, seed: int) -> SwapTestEstimate:
    p0 = swap_test_probability(a, b)
    return SwapTestEstimate(amplitude_estimation_sample(min(p0, 1.0), P, seed), 0, "amplitude_estimation")
