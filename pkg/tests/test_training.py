import math

import numpy as np
import pytest

import oracles
from vqkmeans.clustering import ClusterConfig
from vqkmeans.datasets import make_blobs, preprocess
from vqkmeans.feature_map import FeatureMapSpec, embed_batch, init_theta
from vqkmeans.training import (
    FidelityObjective,
    NumericalError,
    TrainConfig,
    build_objective,
    cost_hilbert_schmidt,
    cost_state_overlap,
    evaluate_cost,
    gradient,
    hs_distance,
    hs_weights,
    overlap_matrix,
    rmsprop_step,
    train,
)

e = np.eye(4, dtype=complex)


def test_overlap_matrix_cases(rng):
    np.testing.assert_allclose(overlap_matrix([e[0], e[0]]), np.ones((2, 2)))
    np.testing.assert_allclose(overlap_matrix([e[0], e[1]]), np.eye(2))
    S = np.array([oracles.random_state(rng, 2) for _ in range(3)])
    M = overlap_matrix(S)
    np.testing.assert_array_equal(M, M.T)
    ref = np.array([[oracles.fidelity(a, b) for b in S] for a in S])
    np.testing.assert_allclose(M, ref, atol=1e-12)


def test_state_overlap_cost(rng):
    assert cost_state_overlap(np.ones((2, 2))) == 2.0
    assert cost_state_overlap(np.eye(2)) == 0.0
    M = overlap_matrix(np.array([oracles.random_state(rng, 2) for _ in range(3)]))
    ref = sum(M[i, j] for i in range(3) for j in range(3) if i != j)
    assert cost_state_overlap(M) == pytest.approx(ref, abs=1e-12)


def test_hs_distance_cases(rng):
    assert hs_distance([e[2]], [e[2]]) == pytest.approx(0.0, abs=1e-15)
    assert hs_distance([e[0]], [e[3]]) == pytest.approx(1.0)
    A = np.array([oracles.random_state(rng, 2) for _ in range(3)])
    B = np.array([oracles.random_state(rng, 2) for _ in range(2)])
    aa = sum(oracles.fidelity(a, b) for a in A for b in A) / 9
    bb = sum(oracles.fidelity(a, b) for a in B for b in B) / 4
    ab = sum(oracles.fidelity(a, b) for a in A for b in B) / 6
    assert hs_distance(A, B) == pytest.approx(0.5 * aa + 0.5 * bb - ab, abs=1e-12)
    with pytest.raises(ValueError):
        hs_distance(A, np.zeros((0, 4)))


def test_hs_cost_cases(rng):
    assert cost_hilbert_schmidt([e[1], e[1]], [0, 1], 2) == pytest.approx(1.0)
    assert cost_hilbert_schmidt([e[0], e[1]], [0, 1], 2) == pytest.approx(0.0, abs=1e-15)
    X = np.array([oracles.random_state(rng, 2) for _ in range(7)])
    labels = np.array([0, 1, 2, 0, 1, 2, 2])
    groups = [X[labels == j] for j in range(3)]
    ref = sum(1 - hs_distance(groups[a], groups[b]) for a in range(3) for b in range(a + 1, 3))
    assert cost_hilbert_schmidt(X, labels, 3) == pytest.approx(ref, abs=1e-12)


def test_hs_weights_reproduce_cost(rng):
    X = np.array([oracles.random_state(rng, 2) for _ in range(9)])
    labels = rng.permutation([0, 0, 0, 1, 1, 2, 2, 2, 2])
    W, c = hs_weights(labels, 3)
    F = np.array([[oracles.fidelity(a, b) for b in X] for a in X])
    assert c + np.sum(W * F) == pytest.approx(cost_hilbert_schmidt(X, labels, 3), abs=1e-12)


def test_evaluate_cost_dispatch(rng):
    X = np.array([oracles.random_state(rng, 2) for _ in range(4)])
    with pytest.raises(ValueError):
        evaluate_cost(X, [0, 0, 1, 1], 2, "trace")


# -- gradients ----------------------------------------------------------------

def test_constant_objective_has_zero_gradient():
    assert np.all(gradient(lambda t: 3.0, np.ones(5)) == 0)


def test_fd_gradient_of_quadratic():
    g = gradient(lambda t: float(np.sum(t**2)), np.array([1.0, -2.0]), h=1e-3)
    np.testing.assert_allclose(g, [2.0, -4.0], atol=1e-9)


@pytest.mark.parametrize("layers", [1, 2, 4])
def test_parameter_shift_matches_fd(rng, layers):
    spec = FeatureMapSpec(n_layers=layers)
    data = rng.uniform(-1.5, 1.5, size=(6, 2))
    obj = build_objective(data, [0, 1, 0, 1, 1, 0], 2, spec)
    theta = init_theta(spec, seed=layers)
    np.testing.assert_allclose(gradient(obj, theta, "parameter_shift"),
                               gradient(obj, theta, "finite_difference", h=1e-4), atol=1e-6)


def test_parameter_shift_fixed_bra(rng):
    spec = FeatureMapSpec(n_layers=2)
    data = rng.uniform(-1, 1, size=(3, 2))
    target = oracles.random_state(rng, 2)
    obj = FidelityObjective(spec, np.ones((1, 3)), ket_data=data, fixed_bra=[target])
    theta = init_theta(spec, 1)
    np.testing.assert_allclose(gradient(obj, theta, "parameter_shift"),
                               gradient(obj, theta, "finite_difference", h=1e-4), atol=1e-6)


def test_parameter_shift_needs_fidelity_objective():
    with pytest.raises(TypeError):
        gradient(lambda t: 0.0, np.zeros(3), "parameter_shift")
    with pytest.raises(ValueError):
        gradient(lambda t: 0.0, np.zeros(3), "adjoint")


def test_non_finite_objective_raises():
    with pytest.raises(NumericalError):
        gradient(lambda t: float("nan"), np.zeros(2))


def test_state_overlap_objective_matches_cost(rng):
    spec = FeatureMapSpec(n_layers=2)
    data = rng.uniform(-1, 1, size=(6, 2))
    labels = [0, 0, 1, 1, 2, 2]
    theta = init_theta(spec, 0)
    obj = build_objective(data, labels, 3, spec, "state_overlap")
    assert obj(theta) == pytest.approx(evaluate_cost(embed_batch(data, theta, spec), labels, 3, "state_overlap"))


# -- RMSProp ------------------------------------------------------------------

def test_rmsprop_hand_value():
    theta, acc = rmsprop_step(np.array([0.0]), np.array([1.0]), np.array([0.0]), 0.1, 0.9, 1e-8)
    assert acc[0] == pytest.approx(0.1)
    assert theta[0] == pytest.approx(-0.1 / (math.sqrt(0.1) + 1e-8), abs=1e-12)
    assert theta[0] == pytest.approx(-0.3162, abs=1e-4)


def test_rmsprop_zero_gradient_and_determinism():
    theta, acc = rmsprop_step(np.ones(3), np.zeros(3), np.full(3, 0.5))
    np.testing.assert_array_equal(theta, np.ones(3))
    np.testing.assert_allclose(acc, 0.45)
    a = rmsprop_step(np.ones(2), np.array([0.3, -1]), np.zeros(2))
    b = rmsprop_step(np.ones(2), np.array([0.3, -1]), np.zeros(2))
    np.testing.assert_array_equal(a[0], b[0])


# -- training loop --------------------------------------------------------------

@pytest.fixture(scope="module")
def small_blobs():
    return preprocess(make_blobs(n_per_cluster=15, k=2, seed=3))


def test_train_zero_epochs(small_blobs):
    spec = FeatureMapSpec(n_layers=2)
    trace = train(small_blobs.points, small_blobs.labels, spec, ClusterConfig(k=2), TrainConfig(max_epochs=0))
    assert len(trace.records) == 1 and trace.records[0].epoch == 0
    np.testing.assert_array_equal(trace.theta, trace.initial_theta)


def test_train_reduces_cost_and_is_deterministic(small_blobs):
    spec = FeatureMapSpec(n_layers=2)
    cfg = TrainConfig(max_epochs=15, seed=1)
    a = train(small_blobs.points, small_blobs.labels, spec, ClusterConfig(k=2), cfg)
    b = train(small_blobs.points, small_blobs.labels, spec, ClusterConfig(k=2), cfg)
    assert a.min_cost < a.costs[0]
    np.testing.assert_array_equal(a.costs, b.costs)
    assert a.best_theta.shape == (6,)


def test_single_layer_angles_are_inert(small_blobs):
    # with one layer every angle acts after the encoding, as a shared unitary
    spec = FeatureMapSpec(n_layers=1)
    obj = build_objective(small_blobs.points, small_blobs.labels, 2, spec)
    assert np.max(np.abs(gradient(obj, init_theta(spec, 4), "parameter_shift"))) < 1e-12


def test_train_convergence_flag(small_blobs):
    spec = FeatureMapSpec(n_layers=2)
    trace = train(small_blobs.points, small_blobs.labels, spec, ClusterConfig(k=2),
                  TrainConfig(max_epochs=500, eps4=1e-2, step_size=0.01))
    assert trace.converged
    assert abs(trace.costs[-1] - trace.costs[-2]) < 1e-2


def test_train_alternating_and_shift(small_blobs):
    spec = FeatureMapSpec(n_layers=2)
    cfg = TrainConfig(max_epochs=3, eps4=1e-12, label_mode="alternating", grad_method="parameter_shift")
    trace = train(small_blobs.points, None, spec, ClusterConfig(k=2), cfg)
    assert len(trace.records) == 4
    assert trace.records[1].events[0]["event"] == "qmeans"


def test_train_supervised_needs_labels(small_blobs):
    with pytest.raises(ValueError):
        train(small_blobs.points, None, FeatureMapSpec(), ClusterConfig(k=2), TrainConfig(max_epochs=1))


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(step_size=0)
    with pytest.raises(ValueError):
        TrainConfig(cost="kl")
    with pytest.raises(ValueError):
        TrainConfig(rms_decay=1.0)
    cfg = TrainConfig(step_size=0.05, seed=3)
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg
