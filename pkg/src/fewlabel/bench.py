"""Multi-split benchmark runner, hyperparameter sweep, and diagnostics.

Experiments are fully described by an :class:`ExperimentConfig`. Every
split index maps to a deterministic pair of seeds (split layout, run
stream), so a report is reproducible across machines and worker-pool
sizes.
"""

import dataclasses
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from . import models as mdl
from .data import load_bundle, make_split
from .graph import Graph, normalized_laplacian
from .pseudo import PseudoConfig, _ce_sum, pseudo_labels
from .seeding import derive_seed, derived_rng
from .training import TrainConfig, train


class ConfigError(ValueError):
    """Invalid experiment configuration (bad key, value, or shape)."""


# Search space used by published sweeps. The sweep itself accepts any
# grid: several tuned L2 rates below fall outside this list, so it is
# documentation and a CLI default, not a validation gate.
CANONICAL_SEARCH_SPACE = {
    "pseudo_weight": [0.1, 1.0],
    "threshold": [round(0.1 * k, 1) for k in range(1, 10)],
    "balancing": [True, False],
    "negative_weight": [0.0, 0.1, 0.3, 1.0, 3.0],
    "sample_sizes": [(1, 10), (2, 5), (5, 2), (10, 1)],
    "l2_rate": [1e-2, 5e-3, 1e-3, 5e-4, 1e-4, 5e-5, 0.0],
    "dropout": [0.5, 0.8],
    "early_stopping": [True, False],
    "depth": [10, 15, 20],
}


def _row(balancing, threshold, negative_weight, sizes, l2_rate, dropout, **extra):
    row = {
        "pseudo_weight": 1.0,
        "balancing": balancing,
        "threshold": threshold,
        "negative_weight": negative_weight,
        "sample_sizes": sizes,
        "l2_rate": l2_rate,
        "dropout": dropout,
    }
    row.update(extra)
    return row


# Defaults found by validation-accuracy sweeps, keyed by
# (bundle name, model kind, labels per class).
TUNED_DEFAULTS = {
    ("cora", "gcn", 1): _row(True, 0.2, 1.0, (5, 2), 5e-4, 0.8),
    ("cora", "gcn", 3): _row(True, 0.5, 0.0, (0, 0), 1e-3, 0.8),
    ("cora", "gcn", 5): _row(True, 0.5, 1.0, (5, 2), 1e-3, 0.8),
    ("cora", "gcn", 10): _row(False, 0.5, 1.0, (2, 5), 1e-3, 0.8),
    ("cora", "gcn", 20): _row(False, 0.8, 0.0, (0, 0), 1e-3, 0.8),
    ("cora", "dagnn", 1): _row(True, 0.4, 1.0, (5, 2), 5e-3, 0.8, depth=15),
    ("cora", "dagnn", 3): _row(True, 0.5, 1.0, (2, 5), 5e-3, 0.8, depth=15),
    ("cora", "dagnn", 5): _row(True, 0.6, 1.0, (10, 1), 5e-3, 0.8, depth=15),
    ("cora", "dagnn", 10): _row(False, 0.6, 0.0, (0, 0), 5e-3, 0.8, depth=15),
    ("cora", "dagnn", 20): _row(False, 0.9, 1.0, (10, 1), 5e-3, 0.8, depth=10),
    ("citeseer", "gcn", 1): _row(True, 0.2, 0.0, (0, 0), 5e-4, 0.8),
    ("citeseer", "gcn", 3): _row(True, 0.4, 3.0, (5, 2), 2e-3, 0.5),
    ("citeseer", "gcn", 5): _row(True, 0.6, 3.0, (5, 2), 2e-3, 0.5),
    ("citeseer", "gcn", 10): _row(True, 0.6, 1.0, (2, 5), 2e-3, 0.8),
    ("citeseer", "gcn", 20): _row(True, 0.6, 1.0, (2, 5), 2e-3, 0.5),
    ("citeseer", "dagnn", 1): _row(True, 0.2, 1.0, (5, 2), 5e-4, 0.8, depth=15),
    ("citeseer", "dagnn", 3): _row(True, 0.5, 1.0, (2, 5), 5e-3, 0.5, depth=15),
    ("citeseer", "dagnn", 5): _row(True, 0.6, 0.0, (0, 0), 5e-3, 0.5, depth=15),
    ("citeseer", "dagnn", 10): _row(True, 0.6, 0.0, (0, 0), 2e-2, 0.8, depth=15),
    ("citeseer", "dagnn", 20): _row(True, 0.6, 0.0, (0, 0), 2e-2, 0.8, depth=10),
    # calibrated on the bundled synthetic benchmark (see scripts/)
    ("synthetic", "gcn", 1): _row(True, 0.4, 0.1, (5, 2), 5e-4, 0.5,
                                  max_epochs=600, min_epoch=300),
    ("synthetic", "dagnn", 1): _row(True, 0.4, 1.0, (5, 2), 5e-4, 0.5,
                                    max_epochs=600, min_epoch=300),
}


def tuned_defaults(dataset_name, model_kind, per_class):
    """Override dict for a tuned benchmark task, or None if unknown."""
    row = TUNED_DEFAULTS.get((dataset_name, model_kind, per_class))
    return dict(row) if row is not None else None


# ---------------------------------------------------------------------------
# experiment configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """One benchmark task: dataset, model, method, and run protocol.

    The three ``disable_*`` toggles compose: disabling negatives and
    balancing leaves threshold selection only, disabling all three
    yields the fixed pseudo-label baseline over every unlabeled node.
    ``supervised_only`` switches the whole method off.
    """

    dataset: str
    model: mdl.ModelConfig = field(default_factory=mdl.ModelConfig)
    pseudo: PseudoConfig = field(default_factory=PseudoConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    per_class: int = 1
    num_splits: int = 20
    base_seed: int = 0
    workers: int = 1
    row_normalize: bool = False
    supervised_only: bool = False
    disable_balancing: bool = False
    disable_negative: bool = False
    disable_adaptive: bool = False

    def validate(self):
        if not self.dataset:
            raise ConfigError("dataset path must be non-empty")
        if self.per_class < 1:
            raise ConfigError(f"per_class must be >= 1, got {self.per_class}")
        if self.num_splits < 1:
            raise ConfigError(f"num_splits must be >= 1, got {self.num_splits}")
        if self.workers < 0:
            raise ConfigError(f"workers must be >= 0, got {self.workers}")
        try:
            self.model.validate()
            self.pseudo.validate()
            self.train.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def effective_pseudo(self):
        """The PseudoConfig actually trained with, after toggles."""
        if self.supervised_only:
            return None
        p = self.pseudo
        if self.disable_balancing:
            p = replace(p, balancing=False)
        if self.disable_negative:
            p = replace(p, negative_weight=0.0, num_positives=0, num_negatives=0)
        if self.disable_adaptive:
            p = replace(p, adaptive=False)
        return p


_MODEL_KEYS = {"kind", "hidden", "depth", "score_activation", "include_level_zero"}
_PSEUDO_KEYS = {"pseudo_weight", "threshold", "balancing", "negative_weight",
                "num_positives", "num_negatives", "adaptive"}
_TRAIN_KEYS = {"max_epochs", "lr", "l2_rate", "l2_first_layer_only", "dropout",
               "early_stopping", "window", "min_epoch", "stop_mode", "debug"}
_TOP_KEYS = {"dataset", "per_class", "num_splits", "base_seed", "workers",
             "row_normalize", "supervised_only", "disable_balancing",
             "disable_negative", "disable_adaptive"}


def apply_overrides(config: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    """Return a copy of ``config`` with flat override keys applied.

    Keys are routed to the model, pseudo, or train section by name;
    ``sample_sizes`` expands to the positive/negative pair. Unknown
    keys raise ConfigError.
    """
    model, pseudo, train_cfg = config.model, config.pseudo, config.train
    top = {}
    for key, value in overrides.items():
        if key == "sample_sizes":
            pos, neg = value
            pseudo = replace(pseudo, num_positives=int(pos), num_negatives=int(neg))
        elif key in _PSEUDO_KEYS:
            pseudo = replace(pseudo, **{key: value})
        elif key in _TRAIN_KEYS:
            train_cfg = replace(train_cfg, **{key: value})
        elif key in _MODEL_KEYS:
            model = replace(model, **{key: value})
        elif key in _TOP_KEYS:
            top[key] = value
        else:
            raise ConfigError(f"unknown override {key!r}")
    out = replace(config, model=model, pseudo=pseudo, train=train_cfg, **top)
    out.validate()
    return out


def config_from_dict(raw: dict, dataset: str | None = None) -> ExperimentConfig:
    """Build a validated ExperimentConfig from a JSON-style dict."""
    if not isinstance(raw, dict):
        raise ConfigError(f"config must be an object, got {type(raw).__name__}")
    raw = dict(raw)
    sections = {}
    for name, cls, allowed in [("model", mdl.ModelConfig, _MODEL_KEYS),
                               ("pseudo", PseudoConfig, _PSEUDO_KEYS),
                               ("train", TrainConfig, _TRAIN_KEYS)]:
        body = raw.pop(name, {})
        if not isinstance(body, dict):
            raise ConfigError(f"section {name!r} must be an object")
        unknown = set(body) - allowed
        if unknown:
            raise ConfigError(f"unknown key {sorted(unknown)[0]!r} in section {name!r}")
        sections[name] = cls(**body)
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
    if dataset is not None:
        raw["dataset"] = dataset
    if "dataset" not in raw:
        raise ConfigError("config needs a dataset path")
    config = ExperimentConfig(**sections, **raw)
    config.validate()
    return config


def config_to_dict(config: ExperimentConfig) -> dict:
    out = dataclasses.asdict(config)
    return out


# ---------------------------------------------------------------------------
# benchmark runner
# ---------------------------------------------------------------------------

@dataclass
class SplitOutcome:
    """Result of one split's training run (or its failure)."""

    index: int
    split_seed: int
    run_seed: int
    status: str
    test_acc: float | None = None
    val_acc: float | None = None
    best_epoch: int | None = None
    epochs_run: int | None = None
    stopped_early: bool | None = None
    error: str | None = None


@dataclass
class Report:
    """Benchmark report: per-split outcomes plus summary statistics."""

    config: dict
    dataset_name: str
    outcomes: list
    mean: float
    std: float
    num_failed: int

    @property
    def accuracies(self):
        return [o.test_acc for o in self.outcomes if o.status == "ok"]

    def to_json(self) -> str:
        payload = {
            "dataset_name": self.dataset_name,
            "config": self.config,
            "mean_test_accuracy": self.mean,
            "std_test_accuracy": self.std,
            "num_failed": self.num_failed,
            "splits": [dataclasses.asdict(o) for o in self.outcomes],
        }
        return json.dumps(payload, indent=2) + "\n"

    def render_table(self) -> str:
        header = f"{'split':>5} {'seed':>6} {'status':>7} {'test':>7} {'val':>7} {'best':>6} {'epochs':>7}"
        lines = [f"dataset: {self.dataset_name}", header, "-" * len(header)]
        for o in self.outcomes:
            if o.status == "ok":
                lines.append(
                    f"{o.index:>5} {o.split_seed:>6} {o.status:>7} "
                    f"{o.test_acc:>7.4f} {o.val_acc:>7.4f} {o.best_epoch:>6} {o.epochs_run:>7}"
                )
            else:
                lines.append(f"{o.index:>5} {o.split_seed:>6} {o.status:>7} {o.error}")
        lines.append("-" * len(header))
        lines.append(f"mean {self.mean:.4f}  std {self.std:.4f}  "
                     f"failed {self.num_failed}/{len(self.outcomes)}")
        return "\n".join(lines) + "\n"

    def csv_series(self) -> str:
        rows = ["split_index,split_seed,status,test_acc,val_acc,best_epoch,epochs_run,stopped_early"]
        for o in self.outcomes:
            rows.append(",".join([
                str(o.index), str(o.split_seed), o.status,
                "" if o.test_acc is None else repr(o.test_acc),
                "" if o.val_acc is None else repr(o.val_acc),
                "" if o.best_epoch is None else str(o.best_epoch),
                "" if o.epochs_run is None else str(o.epochs_run),
                "" if o.stopped_early is None else str(o.stopped_early).lower(),
            ]))
        return "\n".join(rows) + "\n"


def _available_cores() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


def _run_one_split(graph: Graph, config: ExperimentConfig, idx: int) -> SplitOutcome:
    split_seed = config.base_seed + idx
    run_seed = derive_seed(split_seed, "init")
    try:
        split = make_split(graph, config.per_class, split_seed)
        result = train(graph, split, config.model, config.effective_pseudo(),
                       config.train, run_seed)
        return SplitOutcome(
            index=idx, split_seed=split_seed, run_seed=run_seed, status="ok",
            test_acc=result.test_acc, val_acc=result.best_val_acc,
            best_epoch=result.best_epoch, epochs_run=result.epochs_run,
            stopped_early=result.stopped_early,
        )
    except Exception as exc:  # a failed split must not sink the others
        return SplitOutcome(index=idx, split_seed=split_seed, run_seed=run_seed,
                            status="failed", error=f"{type(exc).__name__}: {exc}")


_WORKER_STATE: dict = {}


def _worker_init(graph, config):
    _WORKER_STATE["graph"] = graph
    _WORKER_STATE["config"] = config


def _worker_run(idx):
    return _run_one_split(_WORKER_STATE["graph"], _WORKER_STATE["config"], idx)


def row_normalize_features(graph: Graph) -> Graph:
    """New graph whose feature rows sum to one (zero rows stay zero)."""
    feats = graph.features.tocsr(copy=True)
    sums = np.asarray(feats.sum(axis=1)).ravel()
    scale = np.divide(1.0, sums, out=np.zeros_like(sums), where=sums != 0)
    feats = sp.diags(scale) @ feats
    return Graph.from_parts(graph.num_nodes, graph.edges, feats,
                            graph.labels, graph.num_classes)


def _dataset_name(path: str) -> str:
    meta = os.path.join(path, "meta.json")
    try:
        with open(meta) as fh:
            return str(json.load(fh)["name"])
    except (OSError, ValueError, KeyError):
        return os.path.basename(os.path.normpath(path))


def run_benchmark(config: ExperimentConfig, *, graph: Graph | None = None,
                  progress=None) -> Report:
    """Run ``num_splits`` independent trainings and assemble a report.

    Split ``idx`` trains on the split drawn with seed ``base_seed +
    idx`` and the run stream derived from that seed, so reports are
    identical for any worker count. A split that raises is recorded as
    failed and the rest continue. ``progress``, if given, is called
    with each SplitOutcome as it completes (completion order).

    Pass ``graph`` to reuse an already loaded (and, if desired,
    row-normalized) bundle; otherwise the bundle is loaded from
    ``config.dataset`` and ``row_normalize`` is honored.
    """
    config.validate()
    if graph is None:
        graph = load_bundle(config.dataset)
        if config.row_normalize:
            graph = row_normalize_features(graph)
    workers = config.workers or _available_cores()
    indices = range(config.num_splits)
    outcomes = []
    if workers == 1 or config.num_splits == 1:
        for idx in indices:
            outcome = _run_one_split(graph, config, idx)
            if progress is not None:
                progress(outcome)
            outcomes.append(outcome)
    else:
        with ProcessPoolExecutor(max_workers=min(workers, config.num_splits),
                                 initializer=_worker_init,
                                 initargs=(graph, config)) as pool:
            for outcome in pool.map(_worker_run, indices):
                if progress is not None:
                    progress(outcome)
                outcomes.append(outcome)
    outcomes.sort(key=lambda o: o.index)

    accs = [o.test_acc for o in outcomes if o.status == "ok"]
    mean = float(np.mean(accs)) if accs else float("nan")
    std = float(np.std(accs, ddof=1)) if len(accs) >= 2 else 0.0
    echo = config_to_dict(config)
    name = _dataset_name(config.dataset)
    return Report(config=echo, dataset_name=name, outcomes=outcomes,
                  mean=mean, std=std,
                  num_failed=sum(o.status != "ok" for o in outcomes))


def write_report(report: Report, out_dir: str, stem: str = "report") -> list:
    """Write JSON, plain-text, and CSV renderings; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for suffix, text in [(".json", report.to_json()),
                         (".txt", report.render_table()),
                         (".csv", report.csv_series())]:
        path = os.path.join(out_dir, stem + suffix)
        with open(path, "w") as fh:
            fh.write(text)
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def _check_probs(probs: np.ndarray):
    if probs.ndim != 2:
        raise ValueError(f"probs must be 2-D, got shape {probs.shape}")
    if np.any(probs < 0) or not np.allclose(probs.sum(axis=1), 1.0, atol=1e-6):
        raise ValueError("probs rows must be non-negative and sum to 1")


def _bin_index(confidence: np.ndarray, bins: int) -> np.ndarray:
    # bin b covers [b/bins, (b+1)/bins), except the last which is closed
    edges = np.arange(1, bins) / bins
    return np.searchsorted(edges, confidence, side="right")


def confidence_histogram(probs, unlabeled, bins: int = 10) -> np.ndarray:
    """Percent of unlabeled nodes per confidence bin; sums to 100."""
    probs = np.asarray(probs, dtype=np.float64)
    unlabeled = np.asarray(unlabeled, dtype=np.int64)
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if unlabeled.size == 0:
        raise ValueError("unlabeled set is empty")
    _check_probs(probs)
    conf = probs[unlabeled].max(axis=1)
    counts = np.bincount(_bin_index(conf, bins), minlength=bins)
    return counts * (100.0 / unlabeled.size)


def pseudo_label_distribution(assignment, unlabeled, num_classes: int) -> np.ndarray:
    """Percent of unlabeled nodes assigned to each class; sums to 100."""
    unlabeled = np.asarray(unlabeled, dtype=np.int64)
    if unlabeled.size == 0:
        raise ValueError("unlabeled set is empty")
    counts = np.bincount(assignment.labels[unlabeled], minlength=num_classes)
    return counts * (100.0 / unlabeled.size)


def confidence_accuracy_correlation(probs, unlabeled, true_labels,
                                    bins: int = 10) -> list:
    """Per-confidence-bin accuracy (%) on the unlabeled set.

    Returns one entry per bin; bins holding no node are None.
    """
    probs = np.asarray(probs, dtype=np.float64)
    unlabeled = np.asarray(unlabeled, dtype=np.int64)
    true_labels = np.asarray(true_labels)
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    if unlabeled.size == 0:
        raise ValueError("unlabeled set is empty")
    _check_probs(probs)
    rows = probs[unlabeled]
    correct = rows.argmax(axis=1) == true_labels[unlabeled]
    which = _bin_index(rows.max(axis=1), bins)
    out = []
    for b in range(bins):
        mask = which == b
        out.append(float(100.0 * correct[mask].mean()) if mask.any() else None)
    return out


def empirical_error_rate(assignment, unlabeled, true_labels) -> float:
    """Fraction of unlabeled nodes whose pseudo label disagrees with truth."""
    unlabeled = np.asarray(unlabeled, dtype=np.int64)
    if unlabeled.size == 0:
        raise ValueError("unlabeled set is empty")
    true_labels = np.asarray(true_labels)
    return float(np.mean(assignment.labels[unlabeled] != true_labels[unlabeled]))


def gradient_gap_bound(theta: float, num_unlabeled: int, num_labeled: int,
                       err_prob: float) -> float:
    """Upper bound 2*theta*|U|/|L|*err on the pseudo-gradient gap.

    Monotone non-decreasing in theta, |U|, and err_prob; non-increasing
    in |L|.
    """
    if theta < 0:
        raise ValueError(f"theta must be >= 0, got {theta}")
    if not 0.0 <= err_prob <= 1.0:
        raise ValueError(f"err_prob must be in [0, 1], got {err_prob}")
    if num_labeled < 1:
        raise ValueError(f"num_labeled must be >= 1, got {num_labeled}")
    if num_unlabeled < 0:
        raise ValueError(f"num_unlabeled must be >= 0, got {num_unlabeled}")
    return 2.0 * theta * (num_unlabeled / num_labeled) * err_prob


def estimate_theta(graph: Graph, params, node_ids, node_labels, *,
                   subsample: int = 32, rng=None, lap=None) -> float:
    """Largest single-node loss gradient norm over a sample of nodes.

    For each sampled node, backpropagates the cross-entropy of that
    node alone (against the given label) through a dropout-free forward
    pass and takes the Frobenius norm across all parameters. An
    estimate for diagnostic traces: reported, never asserted.
    ``subsample=0`` probes every listed node.
    """
    node_ids = np.asarray(node_ids, dtype=np.int64)
    node_labels = np.asarray(node_labels, dtype=np.int64)
    if node_ids.size == 0:
        raise ValueError("node_ids is empty")
    if subsample < 0:
        raise ValueError(f"subsample must be >= 0, got {subsample}")
    if subsample and node_ids.size > subsample:
        if rng is None:
            rng = np.random.default_rng(0)
        pick = rng.choice(node_ids.size, size=subsample, replace=False)
        node_ids, node_labels = node_ids[pick], node_labels[pick]
    if lap is None:
        lap = normalized_laplacian(graph)
    tape = ad.Tape()
    F = mdl.forward(tape, lap, graph.features, params, training=False)
    worst = 0.0
    for j, label in zip(node_ids, node_labels):
        ad.reset_grads(tape)
        loss = _ce_sum(F, np.array([j]), np.array([label]), graph.num_classes)
        grads = ad.backward(tape, loss)
        norm = float(np.sqrt(sum(float((g * g).sum()) for g in grads)))
        worst = max(worst, norm)
    return worst


@dataclass
class DiagnosticsTrace:
    """Per-epoch method diagnostics sampled during one training run."""

    bins: int
    num_unlabeled: int
    num_labeled: int
    epochs: list = field(default_factory=list)
    histograms: list = field(default_factory=list)
    label_distributions: list = field(default_factory=list)
    correlations: list = field(default_factory=list)
    error_rates: list = field(default_factory=list)
    theta_estimates: list = field(default_factory=list)
    gap_bounds: list = field(default_factory=list)
    adaptive_counts: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2) + "\n"

    def csv_series(self) -> str:
        head = ["epoch", "error_rate", "theta_running_max", "gap_bound",
                "adaptive_count"]
        head += [f"conf_bin_{b}" for b in range(self.bins)]
        head += [f"class_pct_{k}" for k in range(len(self.label_distributions[0]))] \
            if self.label_distributions else []
        rows = [",".join(head)]
        for i, epoch in enumerate(self.epochs):
            row = [str(epoch), repr(self.error_rates[i]),
                   repr(self.theta_estimates[i]), repr(self.gap_bounds[i]),
                   str(self.adaptive_counts[i])]
            row += [repr(v) for v in self.histograms[i]]
            row += [repr(v) for v in self.label_distributions[i]]
            rows.append(",".join(row))
        return "\n".join(rows) + "\n"


def run_diagnostics(config: ExperimentConfig, *, graph: Graph | None = None,
                    split_index: int = 0, trace_every: int = 10,
                    theta_subsample: int = 32, bins: int = 10):
    """Train one split while sampling method diagnostics.

    Traces epoch 1 and every ``trace_every``-th epoch: the confidence
    histogram, pseudo-label class distribution, per-bin accuracy,
    pseudo-label error rate, the running-max per-node gradient norm,
    and the resulting gradient-gap bound. Returns (TrainResult, trace).
    """
    config.validate()
    if trace_every < 1:
        raise ConfigError(f"trace_every must be >= 1, got {trace_every}")
    if graph is None:
        graph = load_bundle(config.dataset)
        if config.row_normalize:
            graph = row_normalize_features(graph)
    split_seed = config.base_seed + split_index
    run_seed = derive_seed(split_seed, "init")
    split = make_split(graph, config.per_class, split_seed)
    lap = normalized_laplacian(graph)
    unlabeled = np.setdiff1d(np.arange(graph.num_nodes, dtype=np.int64),
                             split.train)
    pseudo = config.effective_pseudo()
    trace = DiagnosticsTrace(bins=bins, num_unlabeled=int(unlabeled.size),
                             num_labeled=int(split.train.size))
    theta_max = 0.0

    def observe(epoch, probs, params):
        nonlocal theta_max
        if epoch != 1 and epoch % trace_every != 0:
            return
        assignment = pseudo_labels(probs)
        err = empirical_error_rate(assignment, unlabeled, graph.labels)
        theta = estimate_theta(
            graph, params, unlabeled, assignment.labels[unlabeled],
            subsample=theta_subsample,
            rng=derived_rng(run_seed, "theta", epoch), lap=lap,
        )
        theta_max = max(theta_max, theta)
        if pseudo is not None and pseudo.adaptive:
            conf = probs[unlabeled].max(axis=1)
            selected = int((conf >= pseudo.threshold).sum())
        else:
            selected = int(unlabeled.size) if pseudo is not None else 0
        trace.epochs.append(epoch)
        trace.histograms.append(confidence_histogram(probs, unlabeled, bins).tolist())
        trace.label_distributions.append(
            pseudo_label_distribution(assignment, unlabeled, graph.num_classes).tolist())
        trace.correlations.append(
            confidence_accuracy_correlation(probs, unlabeled, graph.labels, bins))
        trace.error_rates.append(err)
        trace.theta_estimates.append(theta_max)
        trace.gap_bounds.append(
            gradient_gap_bound(theta_max, unlabeled.size, split.train.size, err))
        trace.adaptive_counts.append(selected)

    result = train(graph, split, config.model, pseudo, config.train, run_seed,
                   epoch_callback=observe)
    return result, trace


# ---------------------------------------------------------------------------
# hyperparameter sweep
# ---------------------------------------------------------------------------

@dataclass
class SweepEntry:
    overrides: dict
    mean_val_acc: float
    mean_test_acc: float
    num_failed: int


@dataclass
class SweepResult:
    """Grid outcomes sorted by mean validation accuracy, best first."""

    entries: list
    winner: SweepEntry
    winner_config: ExperimentConfig
    tuning_splits: int
    tuning_base_seed: int

    def render_leaderboard(self) -> str:
        lines = [f"{'rank':>4} {'val':>7} {'test':>7} {'failed':>6}  overrides"]
        for rank, e in enumerate(self.entries, start=1):
            val = "nan" if np.isnan(e.mean_val_acc) else f"{e.mean_val_acc:.4f}"
            test = "nan" if np.isnan(e.mean_test_acc) else f"{e.mean_test_acc:.4f}"
            lines.append(f"{rank:>4} {val:>7} {test:>7} {e.num_failed:>6}  "
                         f"{json.dumps(e.overrides, sort_keys=True)}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "tuning_splits": self.tuning_splits,
            "tuning_base_seed": self.tuning_base_seed,
            "winner": dataclasses.asdict(self.winner),
            "leaderboard": [dataclasses.asdict(e) for e in self.entries],
        }
        return json.dumps(payload, indent=2) + "\n"


def expand_grid(grid: dict) -> list:
    """All combinations of a {key: [values]} grid, in insertion order."""
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("sweep grid must be a non-empty object")
    keys = list(grid)
    pools = []
    for key in keys:
        values = grid[key]
        if not isinstance(values, (list, tuple)) or len(values) == 0:
            raise ConfigError(f"grid entry {key!r} must be a non-empty list")
        pools.append(list(values))
    return [dict(zip(keys, combo)) for combo in itertools.product(*pools)]


def sweep(config: ExperimentConfig, grid: dict, *, tuning_splits: int = 5,
          graph: Graph | None = None, progress=None) -> SweepResult:
    """Exhaustive grid search selected by mean validation accuracy.

    Every candidate runs on the same ``tuning_splits`` splits, drawn
    from a seed stream disjoint from evaluation seeds (derived from
    ``base_seed`` with a "tuning" tag). Ties keep the earlier grid
    entry. The winner's config is returned with the original
    evaluation protocol (num_splits, base_seed) restored.
    """
    config.validate()
    if tuning_splits < 1:
        raise ConfigError(f"tuning_splits must be >= 1, got {tuning_splits}")
    combos = expand_grid(grid)
    if graph is None:
        graph = load_bundle(config.dataset)
        if config.row_normalize:
            graph = row_normalize_features(graph)
    tuning_base = derive_seed(config.base_seed, "tuning")
    entries = []
    for overrides in combos:
        candidate = apply_overrides(config, overrides)
        candidate = replace(candidate, num_splits=tuning_splits,
                            base_seed=tuning_base)
        report = run_benchmark(candidate, graph=graph)
        vals = [o.val_acc for o in report.outcomes if o.status == "ok"]
        entry = SweepEntry(
            overrides=dict(overrides),
            mean_val_acc=float(np.mean(vals)) if vals else float("nan"),
            mean_test_acc=report.mean,
            num_failed=report.num_failed,
        )
        if progress is not None:
            progress(entry)
        entries.append(entry)

    def sort_key(pair):
        pos, entry = pair
        val = entry.mean_val_acc
        return (-(val if not np.isnan(val) else -np.inf), pos)

    ranked = [e for _, e in sorted(enumerate(entries), key=sort_key)]
    winner = ranked[0]
    return SweepResult(
        entries=ranked, winner=winner,
        winner_config=apply_overrides(config, winner.overrides),
        tuning_splits=tuning_splits, tuning_base_seed=tuning_base,
    )
