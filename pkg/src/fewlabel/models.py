"""GCN and DAGNN forward passes on the autodiff tape.

Both models output a row-stochastic matrix F (one probability row per
node). Training mode applies inverted dropout to every layer input;
evaluation mode consumes no randomness at all, so identical inputs give
bitwise identical outputs.

Checkpoint format: one JSON header line ``{"model", "shapes", "seed",
"options"}`` terminated by a newline, followed by the raw little-endian
float64 bytes of each array in the header's declared order. Round-trips
are bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .graph import NormalizedLaplacian

__all__ = [
    "ModelConfig",
    "GcnParams",
    "DagnnParams",
    "gcn_forward",
    "dagnn_forward",
    "forward",
    "eval_probabilities",
    "save_params",
    "load_params",
]

GCN_ARRAY_ORDER = ("w1", "w2")
DAGNN_ARRAY_ORDER = ("m1", "m2", "s")


@dataclass
class ModelConfig:
    """Architecture selection, independent of trained weights.

    ``depth``, ``score_activation``, and ``include_level_zero`` apply
    to DAGNN only and are ignored for GCN.
    """

    kind: str = "gcn"
    hidden: int = 64
    depth: int = 10
    score_activation: str = "sigmoid"
    include_level_zero: bool = False

    def validate(self) -> None:
        if self.kind not in ("gcn", "dagnn"):
            raise ValueError(f"unknown model kind: {self.kind!r}")
        if self.hidden < 1:
            raise ValueError("hidden width must be >= 1")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.score_activation not in ("sigmoid", "identity"):
            raise ValueError(f"unknown score_activation: {self.score_activation!r}")


@dataclass
class GcnParams:
    """Two-layer GCN weights, no biases."""

    w1: np.ndarray  # (num_features, hidden)
    w2: np.ndarray  # (hidden, num_classes)

    kind = "gcn"

    def arrays(self) -> list[np.ndarray]:
        return [self.w1, self.w2]

    def replace_arrays(self, arrays) -> None:
        self.w1, self.w2 = arrays


@dataclass
class DagnnParams:
    """DAGNN weights: a two-layer MLP plus a per-level score vector.

    ``depth`` is the number of propagation steps; ``s`` scores each
    propagated representation to gate its contribution. The score
    activation is sigmoid by default (identity selectable), and level 0
    (the unpropagated MLP output) is excluded from the sum unless
    ``include_level_zero`` is set.
    """

    m1: np.ndarray  # (num_features, hidden)
    m2: np.ndarray  # (hidden, num_classes)
    s: np.ndarray  # (num_classes, 1)
    depth: int = 10
    score_activation: str = "sigmoid"
    include_level_zero: bool = False

    kind = "dagnn"

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.score_activation not in ("sigmoid", "identity"):
            raise ValueError(f"unknown score_activation: {self.score_activation!r}")

    def arrays(self) -> list[np.ndarray]:
        return [self.m1, self.m2, self.s]

    def replace_arrays(self, arrays) -> None:
        self.m1, self.m2, self.s = arrays

    def options(self) -> dict:
        return {
            "depth": self.depth,
            "score_activation": self.score_activation,
            "include_level_zero": self.include_level_zero,
        }


def _dropped_features(features, rate, rng, training):
    if training and rate > 0.0:
        return ad.sparse_dropout(features, rate, rng)
    return features


def _hidden_dropout(tape, node, rate, rng, training):
    if training and rate > 0.0:
        mask = tape.constant(ad.dropout_mask(node.shape, rate, rng))
        return ad.hadamard(node, mask)
    return node


def gcn_forward(
    tape: ad.Tape,
    lap: NormalizedLaplacian,
    features,
    params: GcnParams,
    *,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> ad.Node:
    """Two-layer GCN: ``F = softmax(A' relu(A' drop(X) W1) W2)``.

    ``A'`` is the normalized adjacency with self loops. Dropout is
    applied to both layer inputs at train time (features, then hidden
    activations); with ``training=False`` the rng is never touched.

    Leaves are registered on the tape in the order (w1, w2).
    """
    w1 = tape.leaf(params.w1)
    w2 = tape.leaf(params.w2)
    x = _dropped_features(features, dropout, rng, training)
    hidden = ad.relu(ad.spmm(lap.matrix, ad.spmm(x, w1)))
    hidden = _hidden_dropout(tape, hidden, dropout, rng, training)
    logits = ad.spmm(lap.matrix, ad.matmul(hidden, w2))
    return ad.row_softmax(logits)


def dagnn_forward(
    tape: ad.Tape,
    lap: NormalizedLaplacian,
    features,
    params: DagnnParams,
    *,
    dropout: float = 0.0,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> ad.Node:
    """Decoupled propagation: MLP first, then ``depth`` adaptive hops.

    Z = drop(relu(drop(X) M1)) M2, H_l = A' H_{l-1}, and each level is
    gated by a scalar score sigmoid(H_l s) broadcast across classes:
    F = softmax(sum_l H_l * score_l). Dropout touches only the MLP.

    Leaves are registered on the tape in the order (m1, m2, s).
    """
    m1 = tape.leaf(params.m1)
    m2 = tape.leaf(params.m2)
    s = tape.leaf(params.s)
    num_classes = params.m2.shape[1]

    x = _dropped_features(features, dropout, rng, training)
    act = ad.relu(ad.spmm(x, m1))
    act = _hidden_dropout(tape, act, dropout, rng, training)
    z = ad.matmul(act, m2)

    def gated(h: ad.Node) -> ad.Node:
        score = ad.matmul(h, s)
        if params.score_activation == "sigmoid":
            score = ad.sigmoid(score)
        return ad.hadamard(h, ad.row_broadcast(score, num_classes))

    total = gated(z) if params.include_level_zero else None
    h = z
    for _ in range(params.depth):
        h = ad.spmm(lap.matrix, h)
        term = gated(h)
        total = term if total is None else ad.add(total, term)
    return ad.row_softmax(total)


def forward(tape, lap, features, params, *, dropout=0.0, rng=None, training=False) -> ad.Node:
    """Dispatch to the forward pass matching the params type."""
    if isinstance(params, GcnParams):
        return gcn_forward(tape, lap, features, params, dropout=dropout, rng=rng, training=training)
    if isinstance(params, DagnnParams):
        return dagnn_forward(tape, lap, features, params, dropout=dropout, rng=rng, training=training)
    raise TypeError(f"unknown params type: {type(params)!r}")


def eval_probabilities(lap, features, params) -> np.ndarray:
    """Evaluation-mode F as a plain array: pure, no dropout, no rng."""
    return forward(ad.Tape(), lap, features, params, training=False).value


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def _array_order(kind: str):
    if kind == "gcn":
        return GCN_ARRAY_ORDER
    if kind == "dagnn":
        return DAGNN_ARRAY_ORDER
    raise ValueError(f"unknown model kind: {kind!r}")


def save_params(path, params, seed: int) -> None:
    """Write a parameter checkpoint (JSON header + raw float64 bytes)."""
    names = _array_order(params.kind)
    arrays = params.arrays()
    header = {
        "model": params.kind,
        "shapes": {name: list(arr.shape) for name, arr in zip(names, arrays)},
        "seed": int(seed),
        "options": params.options() if params.kind == "dagnn" else {},
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_params(path):
    """Read a checkpoint written by :func:`save_params`.

    Returns ``(params, seed)``; arrays round-trip bit-exactly.
    """
    with open(path, "rb") as fh:
        header_line = fh.readline()
        header = json.loads(header_line.decode("utf-8"))
        kind = header["model"]
        names = _array_order(kind)
        arrays = []
        for name in names:
            shape = tuple(header["shapes"][name])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise ValueError(f"checkpoint truncated while reading '{name}'")
            arrays.append(np.frombuffer(buf, dtype="<f8").astype(np.float64).reshape(shape))
        trailing = fh.read(1)
    if trailing:
        raise ValueError("checkpoint has trailing bytes after declared arrays")
    if kind == "gcn":
        params = GcnParams(*arrays)
    else:
        opts = header.get("options", {})
        params = DagnnParams(
            *arrays,
            depth=int(opts.get("depth", 10)),
            score_activation=opts.get("score_activation", "sigmoid"),
            include_level_zero=bool(opts.get("include_level_zero", False)),
        )
    return params, int(header["seed"])
