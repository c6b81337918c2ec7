"""Command line entry points: bench, sweep, diagnose, inspect-bundle.

Exit codes: 0 full success, 1 when any split failed, 2 for
configuration errors (bad flag combinations, malformed config files,
unreadable bundles).
"""

import argparse
import json
import os
import sys

import numpy as np

from .bench import (
    ConfigError,
    ExperimentConfig,
    _dataset_name,
    apply_overrides,
    config_from_dict,
    run_benchmark,
    run_diagnostics,
    sweep,
    tuned_defaults,
    write_report,
)
from .data import BundleError, load_bundle


def _shared_flags(parser):
    parser.add_argument("--dataset", help="bundle directory")
    parser.add_argument("--model", choices=["gcn", "dagnn"])
    parser.add_argument("--per-class", type=int, dest="per_class")
    parser.add_argument("--splits", type=int)
    parser.add_argument("--full-100", action="store_true",
                        help="run the full 100-split protocol")
    parser.add_argument("--seed", type=int, help="base seed (default 0)")
    parser.add_argument("--config", help="JSON file mirroring ExperimentConfig")
    parser.add_argument("--out", help="directory for report files")
    parser.add_argument("--workers", type=int,
                        help="worker processes; 0 = all available cores")
    parser.add_argument("--row-normalize", action="store_true", default=None,
                        dest="row_normalize")
    parser.add_argument("--tuned", action="store_true",
                        help="apply tuned defaults for (dataset, model, per-class)")
    parser.add_argument("--supervised", action="store_true", default=None,
                        dest="supervised_only", help="turn the method off")
    parser.add_argument("--disable-balancing", action="store_true", default=None)
    parser.add_argument("--disable-negative", action="store_true", default=None)
    parser.add_argument("--disable-adaptive", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fewlabel",
        description="Benchmark sparse-label node classification on graph bundles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="multi-split benchmark")
    _shared_flags(bench)

    sw = sub.add_parser("sweep", help="grid search by validation accuracy")
    _shared_flags(sw)
    sw.add_argument("--grid", required=True,
                    help="JSON file: {override key: [values]}")
    sw.add_argument("--tuning-splits", type=int, default=5)

    diag = sub.add_parser("diagnose", help="trace method diagnostics on one split")
    _shared_flags(diag)
    diag.add_argument("--split-index", type=int, default=0)
    diag.add_argument("--trace-every", type=int, default=10)
    diag.add_argument("--theta-subsample", type=int, default=32)

    inspect = sub.add_parser("inspect-bundle", help="validate and summarize a bundle")
    inspect.add_argument("--dataset", required=True)
    return parser


def _assemble_config(args) -> ExperimentConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except ValueError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        config = config_from_dict(raw, dataset=args.dataset or raw.get("dataset"))
    elif args.dataset:
        config = ExperimentConfig(dataset=args.dataset)
    else:
        raise ConfigError("either --dataset or --config is required")

    overrides = {}
    if args.model is not None:
        overrides["kind"] = args.model
    for key in ("per_class", "workers", "row_normalize", "supervised_only",
                "disable_balancing", "disable_negative", "disable_adaptive"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.full_100:
        overrides["num_splits"] = 100
    elif args.splits is not None:
        overrides["num_splits"] = args.splits
    config = apply_overrides(config, overrides)

    if args.tuned:
        name = _dataset_name(config.dataset)
        row = tuned_defaults(name, config.model.kind, config.per_class)
        if row is None:
            raise ConfigError(
                f"no tuned defaults for ({name!r}, {config.model.kind!r}, "
                f"per_class={config.per_class})"
            )
        config = apply_overrides(config, row)
    return config


def _progress(outcome):
    if outcome.status == "ok":
        print(f"split {outcome.index}: ok  test {outcome.test_acc:.4f}  "
              f"val {outcome.val_acc:.4f}", file=sys.stderr)
    else:
        print(f"split {outcome.index}: FAILED  {outcome.error}", file=sys.stderr)


def _cmd_bench(args) -> int:
    config = _assemble_config(args)
    report = run_benchmark(config, progress=_progress)
    print(report.render_table(), end="")
    if args.out:
        for path in write_report(report, args.out):
            print(f"wrote {path}", file=sys.stderr)
    return 1 if report.num_failed else 0


def _cmd_sweep(args) -> int:
    config = _assemble_config(args)
    try:
        with open(args.grid) as fh:
            grid = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read grid file: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"grid file is not valid JSON: {exc}") from exc

    def entry_progress(entry):
        print(f"candidate {json.dumps(entry.overrides, sort_keys=True)}: "
              f"val {entry.mean_val_acc:.4f}", file=sys.stderr)

    result = sweep(config, grid, tuning_splits=args.tuning_splits,
                   progress=entry_progress)
    print(result.render_leaderboard(), end="")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        json_path = os.path.join(args.out, "sweep.json")
        with open(json_path, "w") as fh:
            fh.write(result.to_json())
        txt_path = os.path.join(args.out, "sweep.txt")
        with open(txt_path, "w") as fh:
            fh.write(result.render_leaderboard())
        print(f"wrote {json_path}", file=sys.stderr)
        print(f"wrote {txt_path}", file=sys.stderr)
    return 1 if any(e.num_failed for e in result.entries) else 0


def _cmd_diagnose(args) -> int:
    config = _assemble_config(args)
    try:
        result, trace = run_diagnostics(
            config, split_index=args.split_index, trace_every=args.trace_every,
            theta_subsample=args.theta_subsample,
        )
    except (ConfigError, BundleError):
        raise
    except Exception as exc:
        print(f"diagnose run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"best epoch {result.best_epoch}  val {result.best_val_acc:.4f}  "
          f"test {result.test_acc:.4f}  epochs {result.epochs_run}")
    if trace.epochs:
        last = len(trace.epochs) - 1
        print(f"final trace (epoch {trace.epochs[last]}): "
              f"error rate {trace.error_rates[last]:.4f}  "
              f"theta {trace.theta_estimates[last]:.4f}  "
              f"gap bound {trace.gap_bounds[last]:.4f}  "
              f"selected {trace.adaptive_counts[last]}/{trace.num_unlabeled}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for fname, text in [("diagnostics.json", trace.to_json()),
                            ("diagnostics.csv", trace.csv_series())]:
            path = os.path.join(args.out, fname)
            with open(path, "w") as fh:
                fh.write(text)
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_inspect(args) -> int:
    graph = load_bundle(args.dataset)
    name = _dataset_name(args.dataset)
    degree = np.bincount(graph.edges.ravel(), minlength=graph.num_nodes) \
        if graph.num_edges else np.zeros(graph.num_nodes, dtype=np.int64)
    nnz = graph.features.getnnz(axis=1)
    print(f"name:      {name}")
    print(f"nodes:     {graph.num_nodes}")
    print(f"edges:     {graph.num_edges}")
    print(f"features:  {graph.num_features} "
          f"(nnz/row min {nnz.min()} mean {nnz.mean():.1f} max {nnz.max()})")
    print(f"classes:   {graph.num_classes}")
    counts = np.bincount(graph.labels, minlength=graph.num_classes)
    for k, count in enumerate(counts):
        print(f"  class {k}: {count}")
    print(f"degree:    min {degree.min()} mean {degree.mean():.2f} max {degree.max()}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "bench": _cmd_bench,
        "sweep": _cmd_sweep,
        "diagnose": _cmd_diagnose,
        "inspect-bundle": _cmd_inspect,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BundleError as exc:
        print(f"bundle error: {exc}", file=sys.stderr)
        return 2


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
