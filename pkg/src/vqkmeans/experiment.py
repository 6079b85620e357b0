"""Experiment configuration, presets and artifact I/O shared by the CLI and demos.

``model.json`` layout (``schema_version`` 1)::

    {
      "schema_version": 1,
      "config": {...},            # full ExperimentConfig echo
      "cost_variant": "hilbert_schmidt",
      "seed": 0,
      "theta": [...],             # angles at the minimum-cost epoch
      "final_theta": [...],       # angles at the last recorded epoch
      "initial_theta": [...],
      "min_cost": 0.03,
      "argmin_epoch": 41,
      "final_cost": 0.04,
      "epochs_run": 50,
      "converged": false          # |dC| < eps4 reached before max_epochs
    }
"""

from __future__ import annotations

import copy
import csv
import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from vqkmeans import datasets as ds
from vqkmeans.clustering import ClusterConfig, permutation_accuracy, qmeans_run
from vqkmeans.feature_map import FeatureMapSpec, check_theta, embed_batch
from vqkmeans.training import (
    TrainConfig,
    TrainingTrace,
    evaluate_cost,
    overlap_matrix,
    train,
)

SCHEMA_VERSION = 1

# Reference workflows. Dataset parameters are the generator defaults; circles are
# clustered in polar coordinates, where the rings separate along r.
PRESETS = {
    "blobs": {
        "dataset": {"kind": "blobs", "n_per_cluster": 100, "params": {}, "polar": False},
        "k": 3,
        "step_size": 0.1,
        "max_epochs": 50,
    },
    "circles": {
        "dataset": {"kind": "circles", "n_per_cluster": 100, "params": {}, "polar": True},
        "k": 2,
        "step_size": 0.1,
        "max_epochs": 100,
    },
    "moons": {
        "dataset": {"kind": "moons", "n_per_cluster": 100, "params": {}, "polar": False},
        "k": 2,
        "step_size": 0.15,
        "max_epochs": 250,
    },
}

DEFAULT_SWEEP = (0.05, 0.1, 0.15)


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration (usage error)."""


@dataclass
class ExperimentConfig:
    dataset: dict = field(default_factory=lambda: {"kind": "blobs", "n_per_cluster": 100, "params": {}})
    feature_map: FeatureMapSpec = field(default_factory=FeatureMapSpec)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    sweep: Optional[list] = None
    output_dir: str = "runs"
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "dataset": copy.deepcopy(self.dataset),
            "feature_map": self.feature_map.to_dict(),
            "cluster": self.cluster.to_dict(),
            "train": self.train.to_dict(),
            "sweep": None if self.sweep is None else list(self.sweep),
            "output_dir": self.output_dir,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            return cls(
                dataset=dict(d.get("dataset", {"kind": "blobs"})),
                feature_map=FeatureMapSpec.from_dict(d.get("feature_map", {})),
                cluster=ClusterConfig.from_dict(d.get("cluster", {})),
                train=TrainConfig.from_dict(d.get("train", {})),
                sweep=d.get("sweep"),
                output_dir=d.get("output_dir", "runs"),
                seed=int(d.get("seed", 0)),
            )
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"invalid experiment config: {exc}") from exc

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Same experiment with every seed slot derived from ``seed``."""
        new = copy.deepcopy(self)
        new.seed = seed
        new.dataset["seed"] = seed
        new.cluster = replace(self.cluster, seed=seed)
        new.train = replace(self.train, seed=seed)
        return new


def preset(name: str, seed: int = 0) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    p = PRESETS[name]
    cfg = ExperimentConfig(
        dataset=copy.deepcopy(p["dataset"]),
        cluster=ClusterConfig(k=p["k"]),
        train=TrainConfig(step_size=p["step_size"], max_epochs=p["max_epochs"]),
    )
    return cfg.with_seed(seed)


def load_raw_dataset(dcfg: dict, seed: Optional[int] = None) -> ds.Dataset:
    """Generate (or read) the dataset described by ``dcfg`` before any transform."""
    if dcfg.get("csv"):
        return ds.load_csv(dcfg["csv"])
    kind = dcfg.get("kind")
    if kind not in ds.GENERATORS:
        raise ConfigError(f"unknown dataset kind {kind!r}; expected one of {sorted(ds.GENERATORS)}")
    seed = dcfg.get("seed", 0) if seed is None else seed
    return ds.generate(kind, n_per_cluster=int(dcfg.get("n_per_cluster", 100)), seed=int(seed),
                       **dcfg.get("params", {}))


def prepare(dataset: ds.Dataset, dcfg: dict) -> ds.Dataset:
    """Apply the optional polar transform, then the standard preprocessing."""
    if dcfg.get("polar"):
        dataset = ds.to_polar(dataset)
    if dcfg.get("preprocess", True):
        dataset = ds.preprocess(dataset, dcfg.get("target_range", ds.DEFAULT_RANGE))
    return dataset


def _check_k(cfg: ExperimentConfig, dataset: ds.Dataset):
    if dataset.n_clusters is not None and cfg.train.label_mode == "supervised" and dataset.n_clusters != cfg.cluster.k:
        raise ConfigError(f"dataset has {dataset.n_clusters} labelled clusters but k={cfg.cluster.k}")


def run_training(cfg: ExperimentConfig, dataset: Optional[ds.Dataset] = None):
    """Train one configuration; returns ``(trace, prepared_dataset)``."""
    if dataset is None:
        dataset = prepare(load_raw_dataset(cfg.dataset), cfg.dataset)
    if cfg.train.label_mode == "supervised" and dataset.labels is None:
        raise ConfigError("supervised training needs a labelled dataset")
    _check_k(cfg, dataset)
    trace = train(dataset.points, dataset.labels, cfg.feature_map, cfg.cluster, cfg.train)
    return trace, dataset


def _num(v: float) -> str:
    return format(float(v), ".17g")


def trace_csv(trace: TrainingTrace, timing: bool = False) -> str:
    """Trace as CSV; ``elapsed_ms`` is left blank unless ``timing`` so reruns are byte-identical."""
    lines = ["epoch,cost,grad_norm,elapsed_ms"]
    for r in trace.records:
        ms = f"{r.elapsed_ms:.3f}" if timing else ""
        lines.append(f"{r.epoch},{_num(r.cost)},{_num(r.grad_norm)},{ms}")
    return "\n".join(lines) + "\n"


def read_trace_csv(path) -> dict:
    """Read a trace CSV into ``{"epoch": [...], "cost": [...], ...}``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ds.CSVFormatError(f"{path}: empty trace file")
    header = [h.strip() for h in rows[0]]
    for col in ("epoch", "cost"):
        if col not in header:
            raise ds.CSVFormatError(f"{path}: missing column {col!r} in header {header!r}")
    out = {h: [] for h in header}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ds.CSVFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for h, v in zip(header, row):
            try:
                out[h].append(float(v) if v != "" else float("nan"))
            except ValueError:
                raise ds.CSVFormatError(f"{path}:{lineno}: bad value {v!r} in column {h!r}") from None
    if not out["epoch"]:
        raise ds.CSVFormatError(f"{path}: trace has no rows")
    return out


def model_dict(cfg: ExperimentConfig, trace: TrainingTrace) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": cfg.to_dict(),
        "cost_variant": trace.cost,
        "seed": cfg.seed,
        "theta": [float(v) for v in trace.best_theta],
        "final_theta": [float(v) for v in trace.theta],
        "initial_theta": [float(v) for v in trace.initial_theta],
        "min_cost": trace.min_cost,
        "argmin_epoch": trace.argmin_epoch,
        "final_cost": float(trace.costs[-1]),
        "epochs_run": int(trace.records[-1].epoch),
        "converged": bool(trace.converged),
    }


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_model(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        model = json.load(fh)
    if model.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported model schema version {model.get('schema_version')!r}")
    return model


def run_clustering(model: dict, dataset: ds.Dataset, cluster: Optional[ClusterConfig] = None):
    """Run q-means under the trained map; returns ``(result, report)``.

    ``dataset`` must already be prepared (polar/preprocessed) like the
    training data.
    """
    cfg = ExperimentConfig.from_dict(model["config"])
    spec = cfg.feature_map
    theta = check_theta(model["theta"], spec)
    cluster = cluster or cfg.cluster
    result = qmeans_run(dataset.points, theta, spec, cluster)
    k = cluster.k
    points = embed_batch(dataset.points, theta, spec)
    counts = np.bincount(result.labels, minlength=k)
    final_cost = None
    if np.all(counts > 0):
        final_cost = evaluate_cost(points, result.labels, k, model.get("cost_variant", "hilbert_schmidt"))
    report = {
        "schema_version": SCHEMA_VERSION,
        "model_config": model["config"],
        "cluster_config": cluster.to_dict(),
        "cost_variant": model.get("cost_variant", "hilbert_schmidt"),
        "final_cost": final_cost,
        "overlap_matrix": overlap_matrix(result.characteristic_states).tolist(),
        "iterations": result.iterations_run,
        "converged": result.converged,
        "cluster_sizes": counts.tolist(),
        "events": result.events,
    }
    if dataset.labels is not None:
        report["accuracy"] = permutation_accuracy(dataset.labels, result.labels, max(k, dataset.n_clusters))
    return result, report
