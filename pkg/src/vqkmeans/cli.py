"""Command-line harness: ``vqkmeans generate|train|cluster|plot``.

Exit codes: 0 success, 1 I/O or data error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from vqkmeans import datasets as ds
from vqkmeans import svg
from vqkmeans.clustering import EstimationMode
from vqkmeans.experiment import (
    DEFAULT_SWEEP,
    PRESETS,
    ConfigError,
    ExperimentConfig,
    dumps_json,
    load_model,
    load_raw_dataset,
    model_dict,
    prepare,
    preset,
    read_trace_csv,
    run_clustering,
    run_training,
    trace_csv,
)


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


def _parse_params(pairs) -> dict:
    params = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    return params


# generate ------------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.kind not in ds.GENERATORS:
        raise UsageError(f"unknown generator {args.kind!r}; choose from {', '.join(sorted(ds.GENERATORS))}")
    try:
        data = ds.generate(args.kind, n_per_cluster=args.n, seed=args.seed, **_parse_params(args.param))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if args.polar:
        data = ds.to_polar(data)
    if args.preprocess:
        data = ds.preprocess(data)
    ds.save_csv(data, args.out)
    lo, hi = data.points.min(axis=0), data.points.max(axis=0)
    print(f"wrote {args.out}: N={len(data)} k={data.n_clusters} "
          f"bounds=[{', '.join(f'({a:.4g}, {b:.4g})' for a, b in zip(lo, hi))}]")
    return 0


# train ---------------------------------------------------------------------

def _base_config(args) -> ExperimentConfig:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config {args.config}: {exc}") from exc
        cfg = ExperimentConfig.from_dict(raw)
        if args.preset:
            raise UsageError("--preset and --config are mutually exclusive")
    else:
        cfg = preset(args.preset or "blobs", args.seed if args.seed is not None else 0)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _apply_train_flags(cfg: ExperimentConfig, args) -> ExperimentConfig:
    if args.data:
        cfg.dataset = {"csv": str(args.data), "polar": args.polar, "preprocess": True}
    elif args.polar:
        cfg.dataset["polar"] = True
    fm = {}
    if args.layers is not None:
        fm["n_layers"] = args.layers
    if args.qubits is not None:
        fm["n_qubits"] = args.qubits
    if args.feature_map is not None:
        fm["kind"] = args.feature_map
    if args.trailing_encoding:
        fm["trailing_encoding"] = True
    if fm:
        cfg.feature_map = replace(cfg.feature_map, **fm)
    cl = {}
    if args.k is not None:
        cl["k"] = args.k
    if args.mode is not None:
        cl["estimation_mode"] = EstimationMode.parse(args.mode)
    if cl:
        cfg.cluster = replace(cfg.cluster, **cl)
    tr = {}
    for flag, key in [("step", "step_size"), ("epochs", "max_epochs"), ("eps4", "eps4"),
                      ("label_mode", "label_mode"), ("grad_method", "grad_method"),
                      ("cost", "cost"), ("init_scale", "init_scale")]:
        value = getattr(args, flag)
        if value is not None:
            tr[key] = value
    if tr:
        cfg.train = replace(cfg.train, **tr)
    if args.sweep is not None:
        cfg.sweep = [float(s) for s in args.sweep.split(",") if s.strip()]
        if not cfg.sweep:
            raise UsageError("--sweep needs at least one step size")
    cfg.output_dir = str(args.out)
    return cfg


def _train_one(cfg: ExperimentConfig):
    trace, _ = run_training(cfg)
    return trace


def _step_tag(step: float) -> str:
    return format(step, "g")


def cmd_train(args) -> int:
    try:
        cfg = _apply_train_flags(_base_config(args), args)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out)
    try:
        dataset = prepare(load_raw_dataset(cfg.dataset), cfg.dataset)
    except (OSError, ds.CSVFormatError) as exc:
        raise DataError(str(exc)) from exc
    if cfg.train.label_mode == "supervised" and dataset.labels is None:
        raise UsageError("supervised training needs a labelled dataset (label column missing)")

    runs = [cfg]
    if cfg.sweep:
        runs = [replace_train(cfg, step) for step in cfg.sweep]
    if len(runs) > 1 and args.jobs != 1:
        workers = args.jobs or min(len(runs), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_train_one, runs))
    else:
        traces = [_train_one(r) for r in runs]

    series = {}
    for run, trace in zip(runs, traces):
        suffix = f"_step{_step_tag(run.train.step_size)}" if cfg.sweep else ""
        ds.atomic_write_text(out / f"trace{suffix}.csv", trace_csv(trace, timing=args.record_timing))
        model = model_dict(run, trace)
        if args.record_timing:
            model["elapsed_ms"] = [r.elapsed_ms for r in trace.records]
        ds.atomic_write_text(out / f"model{suffix}.json", dumps_json(model))
        series[f"step {_step_tag(run.train.step_size)}"] = ([r.epoch for r in trace.records], trace.costs)
        print(f"step={run.train.step_size:g}: min C={trace.min_cost:.4f} at epoch {trace.argmin_epoch} "
              f"({len(trace.records) - 1} epochs, converged={trace.converged})")
    if args.plot or cfg.sweep:
        title = f"{cfg.dataset.get('kind', 'dataset')}: C(θ) vs epoch"
        ds.atomic_write_text(out / "cost.svg", svg.line_chart(series, title=title))
    return 0


def replace_train(cfg: ExperimentConfig, step: float) -> ExperimentConfig:
    new = ExperimentConfig.from_dict(cfg.to_dict())
    new.train = replace(cfg.train, step_size=step)
    new.sweep = None
    return new


# cluster -------------------------------------------------------------------

def cmd_cluster(args) -> int:
    try:
        model = load_model(args.model)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read model: {exc}") from exc
    except ConfigError as exc:
        raise DataError(str(exc)) from exc
    cfg = ExperimentConfig.from_dict(model["config"])
    spec = cfg.feature_map
    for flag, field_name in (("layers", "n_layers"), ("qubits", "n_qubits"), ("feature_map", "kind")):
        value = getattr(args, flag)
        if value is not None and value != getattr(spec, field_name):
            raise UsageError(f"--{flag.replace('_', '-')}={value} does not match the model's {field_name}="
                             f"{getattr(spec, field_name)}")
    try:
        if args.data:
            raw = ds.load_csv(args.data)
            dcfg = {**cfg.dataset, "csv": str(args.data)}
        else:
            seed = cfg.dataset.get("seed", 0) if args.seed is None else args.seed
            raw = load_raw_dataset(cfg.dataset, seed=seed)
            dcfg = cfg.dataset
    except (OSError, ds.CSVFormatError) as exc:
        raise DataError(str(exc)) from exc
    dataset = prepare(raw, dcfg)
    cluster = cfg.cluster
    changes = {}
    if args.k is not None:
        changes["k"] = args.k
    if args.mode is not None:
        changes["estimation_mode"] = EstimationMode.parse(args.mode)
    if args.centroid_mode is not None:
        changes["centroid_mode"] = args.centroid_mode
    if args.seed is not None:
        changes["seed"] = args.seed
    if changes:
        cluster = replace(cluster, **changes)
    if cluster.k > len(dataset):
        raise UsageError(f"k={cluster.k} exceeds the number of points ({len(dataset)})")
    result, report = run_clustering(model, dataset, cluster)
    out = Path(args.out)
    labelled = ds.Dataset(raw.points, result.labels, raw.name)
    ds.save_csv(labelled, out / "labels.csv")
    ds.atomic_write_text(out / "report.json", dumps_json(report))
    acc = f", accuracy={report['accuracy']:.3f}" if "accuracy" in report else ""
    print(f"k={cluster.k}: {result.iterations_run} iterations, converged={result.converged}{acc}")
    return 0


# plot ----------------------------------------------------------------------

def cmd_plot(args) -> int:
    if not args.trace and not args.data:
        raise UsageError("nothing to plot: give --trace and/or --data")
    out = Path(args.out)
    written = []
    try:
        if args.trace:
            series = {}
            for path in args.trace:
                tr = read_trace_csv(path)
                series[Path(path).stem] = (tr["epoch"], tr["cost"])
            target = out if out.suffix == ".svg" and not args.data else out / "cost.svg"
            ds.atomic_write_text(target, svg.line_chart(series, title="C(θ) vs epoch"))
            written.append(target)
        if args.data:
            data = ds.load_csv(args.data)
            if data.points.shape[1] != 2:
                raise DataError(f"{args.data}: scatter plots need 2 features")
            target = out if out.suffix == ".svg" and not args.trace else out / "clusters.svg"
            ds.atomic_write_text(target, svg.scatter(data.points, data.labels, title=data.name))
            written.append(target)
    except (OSError, ds.CSVFormatError) as exc:
        raise DataError(str(exc)) from exc
    for path in written:
        print(f"wrote {path}")
    return 0


# entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqkmeans", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset CSV")
    g.add_argument("--kind", required=True, help=f"one of {', '.join(sorted(ds.GENERATORS))}")
    g.add_argument("--n", type=int, default=100, help="points per cluster")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--param", action="append", metavar="KEY=VALUE", help="extra generator argument (JSON value)")
    g.add_argument("--polar", action="store_true", help="convert to (r, phi)")
    g.add_argument("--preprocess", action="store_true", help="standardize and scale into [-pi/2, pi/2]")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train the feature map")
    t.add_argument("--preset", choices=sorted(PRESETS))
    t.add_argument("--config", help="ExperimentConfig JSON; flags override its values")
    t.add_argument("--data", help="dataset CSV (raw coordinates) instead of a generator")
    t.add_argument("--polar", action="store_true")
    t.add_argument("--seed", type=int)
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--step", type=float)
    t.add_argument("--sweep", help="comma-separated step sizes, e.g. " + ",".join(map(str, DEFAULT_SWEEP)))
    t.add_argument("--epochs", type=int)
    t.add_argument("--eps4", type=float)
    t.add_argument("--k", type=int)
    t.add_argument("--layers", type=int)
    t.add_argument("--qubits", type=int)
    t.add_argument("--feature-map", choices=["qaoa_embedding", "havlicek"])
    t.add_argument("--trailing-encoding", action="store_true")
    t.add_argument("--cost", choices=["hilbert_schmidt", "state_overlap"])
    t.add_argument("--label-mode", choices=["supervised", "alternating"])
    t.add_argument("--grad-method", choices=["finite_difference", "parameter_shift"])
    t.add_argument("--init-scale", type=float)
    t.add_argument("--mode", help="kernel estimation for q-means: exact, shots:N or ae:P")
    t.add_argument("--plot", action="store_true", help="write cost.svg")
    t.add_argument("--record-timing", action="store_true", help="fill elapsed_ms (breaks byte-identical reruns)")
    t.add_argument("--jobs", type=int, default=0, help="parallel sweep workers (0 = auto)")
    t.set_defaults(func=cmd_train)

    c = sub.add_parser("cluster", help="cluster a dataset with a trained map")
    c.add_argument("--model", required=True)
    c.add_argument("--data", help="dataset CSV; default regenerates the model's dataset")
    c.add_argument("--seed", type=int, help="regenerate the dataset with this seed (fresh sample)")
    c.add_argument("--out", required=True)
    c.add_argument("--k", type=int)
    c.add_argument("--layers", type=int)
    c.add_argument("--qubits", type=int)
    c.add_argument("--feature-map", choices=["qaoa_embedding", "havlicek"])
    c.add_argument("--mode", help="exact, shots:N or ae:P")
    c.add_argument("--centroid-mode", choices=["data_mean", "feature_state"])
    c.set_defaults(func=cmd_cluster)

    p = sub.add_parser("plot", help="render traces and datasets as SVG")
    p.add_argument("--trace", nargs="*", default=[])
    p.add_argument("--data")
    p.add_argument("--out", required=True, help="output directory or .svg path")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"vqkmeans {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError, ds.CSVFormatError) as exc:
        print(f"vqkmeans {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
