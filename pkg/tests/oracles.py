"""Dense-matrix reference implementations used as test oracles.

Nothing here imports the package: gates are built as full 2^n x 2^n
matrices from Kronecker products and Hermitian matrix exponentials, with
qubit 0 as the most significant bit.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)


def expm_hermitian(G: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t G) for Hermitian G, by eigendecomposition."""
    w, V = np.linalg.eigh(G)
    return (V * np.exp(-1j * t * w)) @ V.conj().T


def embed_op(ops: dict, n: int) -> np.ndarray:
    """Kronecker product with ``ops[q]`` on qubit q and identity elsewhere."""
    return reduce(np.kron, [ops.get(q, I2) for q in range(n)])


def rotation(pauli: np.ndarray, qubit: int, angle: float, n: int) -> np.ndarray:
    return expm_hermitian(embed_op({qubit: pauli}, n), angle / 2)


def zz(a: int, b: int, angle: float, n: int) -> np.ndarray:
    return expm_hermitian(embed_op({a: Z, b: Z}, n), angle / 2)


def cnot(c: int, t: int, n: int) -> np.ndarray:
    return embed_op({c: P0}, n) + embed_op({c: P1, t: X}, n)


def cswap(c: int, a: int, b: int, n: int) -> np.ndarray:
    dim = 2**n
    U = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[c]:
            bits[a], bits[b] = bits[b], bits[a]
        out = sum(bit << (n - 1 - q) for q, bit in enumerate(bits))
        U[out, idx] = 1
    return U


def dense_gate(kind: str, qubits, angle, n: int) -> np.ndarray:
    qubits = tuple(qubits) if isinstance(qubits, (tuple, list)) else (qubits,)
    if kind == "H":
        return embed_op({qubits[0]: H}, n)
    if kind in ("RX", "RY", "RZ"):
        return rotation({"RX": X, "RY": Y, "RZ": Z}[kind], qubits[0], angle, n)
    if kind == "ZZ":
        return zz(qubits[0], qubits[1], angle, n)
    if kind == "CNOT":
        return cnot(qubits[0], qubits[1], n)
    if kind == "CSWAP":
        return cswap(*qubits, n)
    raise ValueError(kind)


def qaoa_state(x, theta, n_layers: int) -> np.ndarray:
    """Two-qubit layered map: RX(x) encoding, ZZ(theta_0), RY(theta_1), RY(theta_2) per layer."""
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1
    theta = np.asarray(theta).reshape(n_layers, 3)
    for t_zz, t_a, t_b in theta:
        psi = rotation(X, 0, x[0], 2) @ psi
        psi = rotation(X, 1, x[1], 2) @ psi
        psi = zz(0, 1, t_zz, 2) @ psi
        psi = rotation(Y, 0, t_a, 2) @ psi
        psi = rotation(Y, 1, t_b, 2) @ psi
    return psi


def inner(a, b) -> complex:
    s = 0j
    for u, v in zip(a, b):
        s += np.conj(u) * v
    return s


def fidelity(a, b) -> float:
    return abs(inner(a, b)) ** 2


def random_state(rng, n_qubits: int) -> np.ndarray:
    v = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return v / np.linalg.norm(v)
