"""Swap test and amplitude estimation, step by step.

Run: python3 demos/swap_test_and_estimation.py
"""

import math

import numpy as np

from vqkmeans.feature_map import FeatureMapSpec, embed, init_theta
from vqkmeans.quantum import (
    amplitude_estimation_bound,
    amplitude_estimation_distribution,
    fidelity,
    sample_swap_test,
    swap_test_probability,
)

# Two points, embedded with the default 2-qubit, 4-layer map at random angles.
spec = FeatureMapSpec()
theta = init_theta(spec, seed=0)
a = embed((0.3, -0.9), theta, spec)
b = embed((0.5, -0.4), theta, spec)

F = fidelity(a, b)
p0 = swap_test_probability(a, b)  # simulates H, three CSWAPs on 5 qubits, H
print(f"fidelity          {F:.6f}")
print(f"swap-test p0      {p0:.6f}   (1 + F)/2 = {(1 + F) / 2:.6f}")

# Finite shots: the estimate tightens like 1/sqrt(shots).
for shots in (100, 1_000, 10_000):
    est = [sample_swap_test(a, b, shots, seed).kernel_hat for seed in range(200)]
    print(f"{shots:>6} shots: kernel {np.mean(est):.4f} +- {np.std(est):.4f}")

# Amplitude estimation with P Grover iterations: the output is sin^2(pi y / P)
# for a phase-register reading y, and lands within the error bound with
# probability at least 8/pi^2.
for P in (4, 8, 16, 32):
    probs = amplitude_estimation_distribution(p0, P)
    estimates = np.sin(np.pi * np.arange(P) / P) ** 2
    inside = probs[np.abs(estimates - p0) <= amplitude_estimation_bound(p0, P)].sum()
    best = estimates[np.argmax(probs)]
    print(f"P={P:>2}: most likely p0_hat {best:.4f}, P(within bound) = {inside:.3f} (>= {8 / math.pi**2:.3f})")
