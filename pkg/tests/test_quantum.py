import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from vqkmeans.quantum import (
    MAX_QUBITS,
    CapacityError,
    Gate,
    ShapeError,
    Statevector,
    amplitude_estimation_bound,
    amplitude_estimation_distribution,
    amplitude_estimation_sample,
    amplitude_estimation_swap_test,
    apply_gate,
    exact_swap_test,
    fidelity,
    kernel_from_p0,
    new_zero_state,
    run_circuit,
    sample_swap_test,
    swap_test_probability,
)

angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


def basis(n, index):
    v = np.zeros(2**n, dtype=complex)
    v[index] = 1
    return Statevector(v)


# -- states ---------------------------------------------------------------------

def test_zero_state():
    np.testing.assert_array_equal(new_zero_state(1).amplitudes, [1, 0])
    np.testing.assert_array_equal(new_zero_state(2).amplitudes, [1, 0, 0, 0])
    assert new_zero_state(3).n_qubits == 3


def test_capacity_guard():
    with pytest.raises(CapacityError):
        new_zero_state(MAX_QUBITS + 1)
    with pytest.raises(CapacityError):
        new_zero_state(0)


def test_statevector_validation():
    with pytest.raises(ShapeError):
        Statevector(np.ones(3) / math.sqrt(3))
    with pytest.raises(ValueError, match="normalized"):
        Statevector(np.array([1.0, 1.0]))
    s = Statevector.from_array([3, 4j], normalize=True)
    assert s.amplitudes[1] == pytest.approx(0.8j)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0


# -- gates ----------------------------------------------------------------------

def test_hadamard_and_rx_pi():
    plus = apply_gate(new_zero_state(1), Gate("H", 0))
    np.testing.assert_allclose(plus.amplitudes, [1 / math.sqrt(2)] * 2, atol=1e-15)
    flipped = apply_gate(new_zero_state(1), Gate("RX", 0, math.pi))
    np.testing.assert_allclose(flipped.amplitudes, [0, -1j], atol=1e-15)


@given(angles)
def test_zz_phase_on_01(phi):
    out = apply_gate(basis(2, 1), Gate("ZZ", (0, 1), phi))
    dense = oracles.zz(0, 1, phi, 2) @ basis(2, 1).amplitudes
    np.testing.assert_allclose(out.amplitudes, dense, atol=1e-12)
    assert out.amplitudes[1] == pytest.approx(np.exp(0.5j * phi), abs=1e-12)


@pytest.mark.parametrize("kind, qubits, angle", [
    ("H", (1,), None), ("RX", (0,), 0.7), ("RY", (2,), -1.3), ("RZ", (1,), 2.9),
    ("ZZ", (2, 0), 0.4), ("CNOT", (2, 0), None), ("CNOT", (0, 1), None), ("CSWAP", (1, 2, 0), None),
])
def test_gate_matches_dense_oracle(rng, kind, qubits, angle):
    psi = oracles.random_state(rng, 3)
    out = apply_gate(Statevector(psi), Gate(kind, qubits, angle))
    np.testing.assert_allclose(out.amplitudes, oracles.dense_gate(kind, qubits, angle, 3) @ psi, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_circuit_matches_dense_product(seed):
    rng = np.random.default_rng(seed)
    n = 3
    psi = oracles.random_state(rng, n)
    gates, U = [], np.eye(2**n, dtype=complex)
    for _ in range(12):
        kind = str(rng.choice(["H", "RX", "RY", "RZ", "ZZ", "CNOT", "CSWAP"]))
        arity = {"ZZ": 2, "CNOT": 2, "CSWAP": 3}.get(kind, 1)
        qubits = tuple(int(q) for q in rng.permutation(n)[:arity])
        angle = float(rng.uniform(-4, 4)) if kind in ("RX", "RY", "RZ", "ZZ") else None
        gates.append(Gate(kind, qubits, angle))
        U = oracles.dense_gate(kind, qubits, angle, n) @ U
    out = run_circuit(Statevector(psi), gates)
    np.testing.assert_allclose(out.amplitudes, U @ psi, atol=1e-12)
    assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0, abs=1e-12)


def test_inverse_undoes_gate(rng):
    psi = Statevector(oracles.random_state(rng, 2))
    for g in [Gate("RX", 0, 0.3), Gate("ZZ", (0, 1), 1.1), Gate("CNOT", (1, 0)), Gate("H", 1)]:
        back = run_circuit(psi, [g, g.inverse()])
        np.testing.assert_allclose(back.amplitudes, psi.amplitudes, atol=1e-14)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("T", 0)
    with pytest.raises(ValueError):
        Gate("RX", 0)
    with pytest.raises(ValueError):
        Gate("H", 0, 0.5)
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(IndexError):
        apply_gate(new_zero_state(2), Gate("H", 2))


# -- fidelity and the swap test ------------------------------------------------

def test_fidelity_basics(rng):
    s = Statevector(oracles.random_state(rng, 2))
    assert fidelity(s, s) == pytest.approx(1.0, abs=1e-14)
    assert fidelity(basis(1, 0), basis(1, 1)) == 0.0
    a, b = oracles.random_state(rng, 2), oracles.random_state(rng, 2)
    assert fidelity(Statevector(a), Statevector(b)) == pytest.approx(oracles.fidelity(a, b), abs=1e-14)


def test_fidelity_register_mismatch():
    with pytest.raises(ShapeError):
        fidelity(new_zero_state(1), new_zero_state(2))


def test_swap_test_probability(rng):
    s = Statevector(oracles.random_state(rng, 2))
    assert swap_test_probability(s, s) == pytest.approx(1.0, abs=1e-14)
    assert swap_test_probability(basis(2, 0), basis(2, 3)) == pytest.approx(0.5, abs=1e-14)
    for _ in range(20):
        a, b = oracles.random_state(rng, 2), oracles.random_state(rng, 2)
        p0 = swap_test_probability(Statevector(a), Statevector(b))
        assert p0 == pytest.approx((1 + oracles.fidelity(a, b)) / 2, abs=1e-12)
    assert exact_swap_test(s, s).kernel_hat == pytest.approx(1.0)


def test_swap_test_against_dense_circuit(rng):
    a, b = oracles.random_state(rng, 1), oracles.random_state(rng, 1)
    joint = np.kron([1, 0], np.kron(a, b))
    U = oracles.dense_gate("H", 0, None, 3)
    U = U @ oracles.cswap(0, 1, 2, 3) @ oracles.dense_gate("H", 0, None, 3)
    out = U @ joint
    p0_ref = float(np.sum(np.abs(out[:4]) ** 2))
    assert swap_test_probability(Statevector(a), Statevector(b)) == pytest.approx(p0_ref, abs=1e-14)


def test_sampled_swap_test(rng):
    s = Statevector(oracles.random_state(rng, 2))
    for seed in range(20):
        assert sample_swap_test(s, s, shots=17, seed=seed).p0_hat == 1.0
    with pytest.raises(ValueError):
        sample_swap_test(s, s, shots=0, seed=0)
    assert sample_swap_test(s, s, 10, 3) == sample_swap_test(s, s, 10, 3)


def test_sampled_swap_test_concentration():
    # orthogonal pair: p0 = 0.5, 1e4 shots, 3-sigma window 0.015
    a, b = basis(2, 0), basis(2, 3)
    hits = sum(abs(sample_swap_test(a, b, 10_000, seed).p0_hat - 0.5) <= 0.015 for seed in range(1000))
    assert hits >= 990


def test_kernel_from_p0_clips():
    assert kernel_from_p0(0.4) == 0.0
    assert kernel_from_p0(0.75) == pytest.approx(0.5)


# -- amplitude estimation -----------------------------------------------------

def _ae_oracle(p0, P):
    """Outcome distribution from a direct simulation of the estimation circuit.

    System: the 2-d span of A|0> = sin(t)|good> + cos(t)|bad>, with the Grover
    iterate Q a rotation by 2t. Register: uniform superposition over
    j = 0..P-1, controlled Q^j, then the inverse DFT of size P.
    """
    t = math.asin(math.sqrt(p0))
    Q = np.array([[math.cos(2 * t), -math.sin(2 * t)], [math.sin(2 * t), math.cos(2 * t)]])
    joint = np.zeros((P, 2), dtype=complex)
    v = np.array([math.cos(t), math.sin(t)], dtype=complex)  # (bad, good)
    for j in range(P):
        joint[j] = v / math.sqrt(P)
        v = Q @ v
    F_inv = np.exp(-2j * math.pi * np.outer(np.arange(P), np.arange(P)) / P) / math.sqrt(P)
    out = F_inv @ joint
    return np.sum(np.abs(out) ** 2, axis=1)


@pytest.mark.parametrize("p0", [0.05, 0.3, 0.5, 0.77])
@pytest.mark.parametrize("P", [4, 8, 16])
def test_ae_distribution_matches_oracle(p0, P):
    np.testing.assert_allclose(amplitude_estimation_distribution(p0, P), _ae_oracle(p0, P), atol=1e-12)


@pytest.mark.parametrize("P", [2, 3, 4, 8, 16, 17])
def test_ae_certainty_cases(P):
    for seed in range(50):
        assert amplitude_estimation_sample(0.0, P, seed) == 0.0
    if P % 2 == 0:
        for seed in range(50):
            assert amplitude_estimation_sample(1.0, P, seed) == pytest.approx(1.0, abs=1e-15)


def test_ae_bound_frequency():
    P, p0 = 8, 0.5
    est = np.array([amplitude_estimation_sample(p0, P, seed) for seed in range(10_000)])
    assert np.mean(np.abs(est - p0) <= amplitude_estimation_bound(p0, P)) >= 8 / math.pi**2


def test_ae_guards():
    with pytest.raises(ValueError):
        amplitude_estimation_distribution(0.5, 1)
    with pytest.raises(ValueError):
        amplitude_estimation_distribution(1.2, 8)


def test_ae_swap_test_identical_states(rng):
    s = Statevector(oracles.random_state(rng, 2))
    est = amplitude_estimation_swap_test(s, s, P=8, seed=1)
    assert est.p0_hat == pytest.approx(1.0, abs=1e-12)
    assert est.kernel_hat == pytest.approx(1.0, abs=1e-12)
