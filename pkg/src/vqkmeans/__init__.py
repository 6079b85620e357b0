"""Variational quantum k-means: a trainable feature map with swap-test q-means on a statevector simulator."""

from vqkmeans.clustering import ClusterConfig, ClusterModel, EstimationMode, qmeans_run
from vqkmeans.datasets import Dataset, generate, load_csv, preprocess, save_csv, to_polar
from vqkmeans.feature_map import FeatureMapSpec, embed, embed_batch, init_theta
from vqkmeans.quantum import Gate, Statevector, fidelity, run_circuit
from vqkmeans.training import TrainConfig, TrainingTrace, train

__all__ = [
    "ClusterConfig", "ClusterModel", "Dataset", "EstimationMode", "FeatureMapSpec", "Gate",
    "Statevector", "TrainConfig", "TrainingTrace", "embed", "embed_batch", "fidelity", "generate",
    "init_theta", "load_csv", "preprocess", "qmeans_run", "run_circuit", "save_csv", "to_polar", "train",
]
__version__ = "0.1.0"
