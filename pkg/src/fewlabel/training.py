"""Optimization and the training loop.

Everything here is deterministic given the integer seed: parameter
init, per-epoch dropout, and negative sampling each draw from their own
generator derived via sha256 from (seed, purpose, epoch). Two runs with
the same inputs produce bitwise identical trajectories, and a run
paused at any epoch and resumed from its saved state finishes on the
identical trajectory, because no generator state needs to survive the
round-trip — each epoch's streams are re-derived.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import models as mdl
from .graph import Graph, is_neighbor, normalized_laplacian
from .pseudo import (
    AdaptiveSet,
    PseudoConfig,
    _empty_sample,
    adaptive_pseudo_labels,
    balancing_factors,
    combined_loss,
    pseudo_labels,
    sample_negatives,
)
from .seeding import derived_rng

__all__ = [
    "TrainConfig",
    "TrainingDiverged",
    "EpochRecord",
    "TrainResult",
    "TrainState",
    "xavier_init",
    "init_params",
    "AdamState",
    "adam_step",
    "early_stop_check",
    "evaluate",
    "train",
    "save_train_state",
    "load_train_state",
]


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------

def xavier_init(shape, rng: np.random.Generator) -> np.ndarray:
    """Uniform Glorot init on ``[-sqrt(6/(fan_in+fan_out)), +...]``."""
    if len(shape) != 2:
        raise ValueError(f"xavier_init expects a 2-D shape, got {shape}")
    bound = np.sqrt(6.0 / (shape[0] + shape[1]))
    return rng.uniform(-bound, bound, size=shape)


def init_params(model: mdl.ModelConfig, num_features: int, num_classes: int,
                rng: np.random.Generator):
    """Draw fresh model parameters (array draw order is fixed)."""
    h = model.hidden
    if model.kind == "gcn":
        return mdl.GcnParams(
            w1=xavier_init((num_features, h), rng),
            w2=xavier_init((h, num_classes), rng),
        )
    if model.kind == "dagnn":
        return mdl.DagnnParams(
            m1=xavier_init((num_features, h), rng),
            m2=xavier_init((h, num_classes), rng),
            s=xavier_init((num_classes, 1), rng),
            depth=model.depth,
            score_activation=model.score_activation,
            include_level_zero=model.include_level_zero,
        )
    raise ValueError(f"unknown model kind: {model.kind!r}")


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

class TrainingDiverged(RuntimeError):
    """Raised when a loss or gradient goes non-finite mid-run."""

    def __init__(self, epoch: int, detail: str):
        super().__init__(f"training diverged at epoch {epoch}: {detail}")
        self.epoch = epoch
        self.detail = detail


@dataclass
class AdamState:
    """First/second moment estimates plus the shared step counter."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, arrays, lr: float = 0.01) -> "AdamState":
        return cls(
            m=[np.zeros_like(a) for a in arrays],
            v=[np.zeros_like(a) for a in arrays],
            lr=lr,
        )


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray],
              l2_rate: float = 0.0, l2_mask: list[bool] | None = None) -> None:
    """One bias-corrected Adam update, in place.

    The L2 term ``l2_rate * param`` is added to each gradient first;
    ``l2_mask`` restricts which parameters it touches (None = all).
    """
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValueError("params/grads do not match optimizer state")
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for k, (p, g) in enumerate(zip(params, grads)):
        if not np.all(np.isfinite(g)):
            raise TrainingDiverged(state.t, f"non-finite gradient for parameter {k}")
        if l2_rate != 0.0 and (l2_mask is None or l2_mask[k]):
            g = g + l2_rate * p
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * (g * g)
        m_hat = state.m[k] / bc1
        v_hat = state.v[k] / bc2
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


# ---------------------------------------------------------------------------
# early stopping / evaluation
# ---------------------------------------------------------------------------

def early_stop_check(val_losses, window: int = 100, min_epoch: int = 500,
                     mode: str = "worsening") -> bool:
    """Decide whether to stop after the most recent epoch.

    Never stops at or before ``min_epoch``. Past it, compares the
    current validation loss to the mean of the preceding ``window``
    losses: mode "worsening" stops when the current loss exceeds the
    mean (loss got worse); mode "literal" stops when it is below the
    mean instead.
    """
    if mode not in ("worsening", "literal"):
        raise ValueError(f"unknown early-stop mode: {mode!r}")
    epoch = len(val_losses)
    if epoch <= min_epoch or epoch < window + 1:
        return False
    current = val_losses[-1]
    window_mean = float(np.mean(val_losses[-window - 1:-1]))
    return current > window_mean if mode == "worsening" else current < window_mean


def evaluate(probs: np.ndarray, ids: np.ndarray, labels: np.ndarray) -> float:
    """Accuracy of row-argmax predictions on a node set (ties -> lowest id)."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size == 0:
        raise ValueError("cannot evaluate on an empty node set")
    preds = np.asarray(probs)[ids].argmax(axis=1)
    return float(np.mean(preds == np.asarray(labels)[ids]))


def _val_loss(probs: np.ndarray, ids: np.ndarray, labels: np.ndarray) -> float:
    picked = probs[ids, np.asarray(labels)[ids]]
    return float(-np.mean(np.log(np.maximum(picked, ad.CLAMP_EPS))))


# ---------------------------------------------------------------------------
# the training loop
# ---------------------------------------------------------------------------

@dataclass
class TrainConfig:
    """Optimizer and schedule settings (model shape lives in ModelConfig)."""

    max_epochs: int = 1000
    lr: float = 0.01
    l2_rate: float = 0.0
    l2_first_layer_only: bool = False
    dropout: float = 0.0
    early_stopping: bool = True
    window: int = 100
    min_epoch: int = 500
    stop_mode: str = "worsening"
    debug: bool = False

    def validate(self) -> None:
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.l2_rate < 0.0:
            raise ValueError("l2_rate must be non-negative")
        if self.window < 1 or self.min_epoch < 0:
            raise ValueError("window must be >= 1 and min_epoch >= 0")
        if self.stop_mode not in ("worsening", "literal"):
            raise ValueError(f"unknown early-stop mode: {self.stop_mode!r}")


@dataclass
class EpochRecord:
    """Per-epoch trace: losses, validation accuracy, selection stats."""

    epoch: int
    train_loss: float
    val_loss: float
    val_acc: float
    adaptive_count: int
    class_counts: tuple


@dataclass
class TrainResult:
    """Outcome of one training run (model selected by validation accuracy)."""

    params: object
    best_epoch: int
    best_val_acc: float
    best_val_loss: float
    test_acc: float
    epochs_run: int
    stopped_early: bool
    records: list = field(repr=False)
    state: "TrainState" = field(default=None, repr=False)


@dataclass
class TrainState:
    """Everything needed to resume a paused run bitwise-identically."""

    model: mdl.ModelConfig
    params: object
    adam: AdamState
    seed: int
    epoch: int  # epochs completed so far
    val_losses: list
    records: list
    best_epoch: int = -1
    best_val_acc: float = -1.0
    best_val_loss: float = float("inf")
    best_test_acc: float = 0.0
    best_arrays: list = None
    stopped_early: bool = False


def _update_best(state: TrainState, epoch, val_acc, val_loss, probs, split, labels) -> None:
    better = (val_acc > state.best_val_acc) or (
        val_acc == state.best_val_acc and val_loss < state.best_val_loss
    )
    if better:
        state.best_epoch = epoch
        state.best_val_acc = val_acc
        state.best_val_loss = val_loss
        state.best_test_acc = evaluate(probs, split.test, labels)
        state.best_arrays = [a.copy() for a in state.params.arrays()]


def _check_sample_validity(graph: Graph, sample) -> None:
    for i, p in enumerate(sample.positives):
        for j in sample.negatives[i]:
            if is_neighbor(graph, int(p), int(j)):
                raise AssertionError(f"negative sample ({p}, {j}) is an adjacent pair")


def train(
    graph: Graph,
    split,
    model: mdl.ModelConfig,
    pseudo: PseudoConfig | None,
    config: TrainConfig,
    seed: int,
    *,
    resume_state: TrainState | None = None,
    pause_at_epoch: int | None = None,
    epoch_callback=None,
) -> TrainResult:
    """Train one model on one split.

    ``pseudo=None`` trains the plain supervised baseline. Otherwise the
    adaptive set is rebuilt every epoch from the detached training-mode
    F, balancing weights are attached, and negatives are drawn from the
    union of labeled and selected nodes. Model selection: the epoch with
    the highest validation accuracy (ties: lower validation loss, then
    earlier epoch); the reported test accuracy is from that epoch.

    ``pause_at_epoch`` stops after that many epochs and returns a
    result whose ``state`` can be checkpointed and passed back as
    ``resume_state`` to finish the run on the identical trajectory.

    ``epoch_callback(epoch, probs, params)`` is called once per epoch
    with the detached training-mode probabilities that drove pseudo
    label selection. It must treat both arguments as read-only; it is
    for observation only and must not perturb the trajectory.
    """
    config.validate()
    if pseudo is not None:
        pseudo.validate()

    lap = normalized_laplacian(graph)
    labels = graph.labels
    c = graph.num_classes
    unlabeled = np.setdiff1d(np.arange(graph.num_nodes, dtype=np.int64), split.train)

    if resume_state is None:
        params = init_params(model, graph.num_features, c, derived_rng(seed, "init"))
        state = TrainState(
            model=model,
            params=params,
            adam=AdamState.for_params(params.arrays(), lr=config.lr),
            seed=seed,
            epoch=0,
            val_losses=[],
            records=[],
        )
    else:
        state = resume_state
        if state.seed != seed:
            raise ValueError("resume state was created with a different seed")

    l2_mask = None
    if config.l2_first_layer_only:
        l2_mask = [k == 0 for k in range(len(state.params.arrays()))]

    empty_set = AdaptiveSet(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64),
                            np.empty(0, dtype=np.float64))

    final_epoch = config.max_epochs if pause_at_epoch is None else min(pause_at_epoch, config.max_epochs)

    while state.epoch < final_epoch and not state.stopped_early:
        epoch = state.epoch + 1
        drop_rng = derived_rng(seed, "dropout", epoch)

        tape = ad.Tape()
        F = mdl.forward(tape, lap, graph.features, state.params,
                        dropout=config.dropout, rng=drop_rng, training=True)
        probs_snapshot = F.value  # detached: selection never backpropagates

        aset = empty_set
        sample_labels = None
        sample = None
        if pseudo is not None:
            if pseudo.adaptive:
                aset = adaptive_pseudo_labels(probs_snapshot, unlabeled, pseudo.threshold)
            else:
                assignment = pseudo_labels(probs_snapshot)
                aset = AdaptiveSet(unlabeled, assignment.labels[unlabeled])
            aset = balancing_factors(aset, pseudo.balancing)

            if pseudo.negative_weight != 0.0 and pseudo.num_positives > 0 and pseudo.num_negatives > 0:
                samp_rng = derived_rng(seed, "negative", epoch)
                pool = np.concatenate([split.train, aset.members])
                sample = sample_negatives(graph, pool, pseudo.num_positives,
                                          pseudo.num_negatives, samp_rng)
                if sample.num_pairs:
                    lookup = labels.copy()
                    lookup[aset.members] = aset.labels
                    sample_labels = lookup[sample.positives]
                    if config.debug:
                        _check_sample_validity(graph, sample)

        if sample is None:
            sample = _empty_sample()
        loss = combined_loss(
            F, split.train, labels, aset, sample, sample_labels,
            pseudo.pseudo_weight if pseudo is not None else 0.0,
            pseudo.negative_weight if pseudo is not None else 0.0,
            c,
        )
        train_loss = float(loss.value[0, 0])
        if not np.isfinite(train_loss):
            raise TrainingDiverged(epoch, f"train loss is {train_loss}")

        grads = ad.backward(tape, loss)
        adam_step(state.adam, state.params.arrays(), grads, config.l2_rate, l2_mask)

        probs_eval = mdl.eval_probabilities(lap, graph.features, state.params)
        val_loss = _val_loss(probs_eval, split.val, labels)
        val_acc = evaluate(probs_eval, split.val, labels)
        state.val_losses.append(val_loss)
        state.records.append(EpochRecord(
            epoch=epoch,
            train_loss=train_loss,
            val_loss=val_loss,
            val_acc=val_acc,
            adaptive_count=aset.size,
            class_counts=tuple(int(x) for x in np.bincount(aset.labels, minlength=c)) if aset.size else tuple([0] * c),
        ))
        _update_best(state, epoch, val_acc, val_loss, probs_eval, split, labels)
        state.epoch = epoch
        if epoch_callback is not None:
            epoch_callback(epoch, probs_snapshot, state.params)

        if config.early_stopping and early_stop_check(
            state.val_losses, config.window, config.min_epoch, config.stop_mode
        ):
            state.stopped_early = True

    best_params = init_params(state.model, graph.num_features, c, derived_rng(seed, "init"))
    best_params.replace_arrays([a.copy() for a in (state.best_arrays or state.params.arrays())])
    return TrainResult(
        params=best_params,
        best_epoch=state.best_epoch,
        best_val_acc=state.best_val_acc,
        best_val_loss=state.best_val_loss,
        test_acc=state.best_test_acc,
        epochs_run=state.epoch,
        stopped_early=state.stopped_early,
        records=state.records,
        state=state,
    )


# ---------------------------------------------------------------------------
# training-state checkpoints (parameter checkpoints live in models.py)
# ---------------------------------------------------------------------------

def save_train_state(path, state: TrainState) -> None:
    """Checkpoint a paused run: header JSON + raw float64 sections.

    Extends the parameter checkpoint with Adam moments, the epoch
    counter, the validation-loss history, and the best-so-far snapshot.
    Bit-exact round-trip.
    """
    arrays = state.params.arrays()
    names = mdl.GCN_ARRAY_ORDER if state.params.kind == "gcn" else mdl.DAGNN_ARRAY_ORDER
    header = {
        "model": state.params.kind,
        "shapes": {n: list(a.shape) for n, a in zip(names, arrays)},
        "seed": state.seed,
        "options": state.params.options() if state.params.kind == "dagnn" else {},
        "model_config": {
            "kind": state.model.kind,
            "hidden": state.model.hidden,
            "depth": state.model.depth,
            "score_activation": state.model.score_activation,
            "include_level_zero": state.model.include_level_zero,
        },
        "adam": {"t": state.adam.t, "lr": state.adam.lr, "beta1": state.adam.beta1,
                 "beta2": state.adam.beta2, "eps": state.adam.eps},
        "epoch": state.epoch,
        "num_val_losses": len(state.val_losses),
        "best": {
            "epoch": state.best_epoch,
            "val_acc": state.best_val_acc,
            "val_loss": state.best_val_loss,
            "test_acc": state.best_test_acc,
            "present": state.best_arrays is not None,
        },
        "stopped_early": state.stopped_early,
        "records": [
            [r.epoch, r.train_loss, r.val_loss, r.val_acc, r.adaptive_count, list(r.class_counts)]
            for r in state.records
        ],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
        for group in (state.adam.m, state.adam.v):
            for a in group:
                fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
        if state.best_arrays is not None:
            for a in state.best_arrays:
                fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
        fh.write(np.asarray(state.val_losses, dtype="<f8").tobytes())


def load_train_state(path) -> TrainState:
    """Restore a :func:`save_train_state` checkpoint bit-exactly."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        names = mdl.GCN_ARRAY_ORDER if header["model"] == "gcn" else mdl.DAGNN_ARRAY_ORDER
        shapes = [tuple(header["shapes"][n]) for n in names]

        def read_arrays():
            out = []
            for shape in shapes:
                count = int(np.prod(shape))
                out.append(np.frombuffer(fh.read(count * 8), dtype="<f8").astype(np.float64).reshape(shape))
            return out

        param_arrays = read_arrays()
        m = read_arrays()
        v = read_arrays()
        best_arrays = read_arrays() if header["best"]["present"] else None
        n_losses = header["num_val_losses"]
        val_losses = list(np.frombuffer(fh.read(n_losses * 8), dtype="<f8").astype(np.float64))

    mc = header["model_config"]
    model = mdl.ModelConfig(kind=mc["kind"], hidden=mc["hidden"], depth=mc["depth"],
                            score_activation=mc["score_activation"],
                            include_level_zero=mc["include_level_zero"])
    if header["model"] == "gcn":
        params = mdl.GcnParams(*param_arrays)
    else:
        opts = header["options"]
        params = mdl.DagnnParams(*param_arrays, depth=opts["depth"],
                                 score_activation=opts["score_activation"],
                                 include_level_zero=opts["include_level_zero"])
    a = header["adam"]
    adam = AdamState(m=m, v=v, t=a["t"], lr=a["lr"], beta1=a["beta1"], beta2=a["beta2"], eps=a["eps"])
    records = [
        EpochRecord(epoch=r[0], train_loss=r[1], val_loss=r[2], val_acc=r[3],
                    adaptive_count=r[4], class_counts=tuple(r[5]))
        for r in header["records"]
    ]
    b = header["best"]
    return TrainState(
        model=model, params=params, adam=adam, seed=header["seed"], epoch=header["epoch"],
        val_losses=val_losses, records=records, best_epoch=b["epoch"],
        best_val_acc=b["val_acc"], best_val_loss=b["val_loss"], best_test_acc=b["test_acc"],
        best_arrays=best_arrays, stopped_early=header["stopped_early"],
    )
