"""Reverse-mode automatic differentiation on an eager tape.

Values are dense 2-D float64 arrays; sparse matrices enter only as
constants on the left side of :func:`spmm`. Every operation appends one
node to a :class:`Tape` at call time, validating operand shapes
immediately, so shape errors surface at construction and never during
the backward pass. :func:`backward` walks the tape once in strict
reverse construction order.

Probabilities passed to :func:`log` are clamped at ``CLAMP_EPS`` before
the ln; the backward is zero inside the clamped region so the analytic
gradient agrees with finite differences of the actual (clamped) forward.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

__all__ = [
    "Tape",
    "Node",
    "backward",
    "matmul",
    "spmm",
    "add",
    "hadamard",
    "relu",
    "row_softmax",
    "log",
    "scale",
    "row_broadcast",
    "sum_all",
    "select_rows",
    "one_minus",
    "sigmoid",
    "dropout_mask",
    "sparse_dropout",
    "set_debug",
    "CLAMP_EPS",
]

CLAMP_EPS = 1e-12

_DEBUG = False


def set_debug(flag: bool) -> None:
    """Toggle per-node finiteness checks (off by default)."""
    global _DEBUG
    _DEBUG = bool(flag)


class Node:
    """One tape entry: an op kind, its value, and a gradient slot.

    The gradient accumulator is allocated lazily on first contribution;
    nodes never reached from the loss keep ``grad is None``.
    """

    __slots__ = ("op", "value", "grad", "tape", "requires_grad", "_backward_fn")

    def __init__(self, op, value, tape, requires_grad, backward_fn=None):
        self.op = op
        self.value = value
        self.grad = None
        self.tape = tape
        self.requires_grad = requires_grad
        self._backward_fn = backward_fn

    @property
    def shape(self) -> tuple[int, int]:
        return self.value.shape

    def _accumulate(self, delta) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad += delta


class Tape:
    """Ordered record of one forward computation.

    Nodes are appended in construction order; ``leaves`` marks the
    trainable inputs in registration order.
    """

    def __init__(self):
        self.nodes: list[Node] = []
        self.leaves: list[Node] = []

    def _register(self, node: Node) -> Node:
        if _DEBUG and not np.all(np.isfinite(node.value)):
            raise FloatingPointError(f"non-finite value created by op '{node.op}'")
        self.nodes.append(node)
        return node

    def leaf(self, value: np.ndarray) -> Node:
        """Register a trainable parameter (no copy is taken)."""
        value = _as_matrix(value, "leaf")
        node = self._register(Node("leaf", value, self, True))
        self.leaves.append(node)
        return node

    def constant(self, value: np.ndarray) -> Node:
        """Register a non-trainable input; no gradient is tracked."""
        value = _as_matrix(value, "constant")
        return self._register(Node("constant", value, self, False))


def _as_matrix(value, what: str) -> np.ndarray:
    value = np.asarray(value, dtype=np.float64)
    if value.ndim != 2:
        raise ValueError(f"{what} must be 2-D, got shape {value.shape}")
    return value


def _same_tape(*nodes: Node) -> Tape:
    tape = nodes[0].tape
    for n in nodes[1:]:
        if n.tape is not tape:
            raise ValueError("operands belong to different tapes")
    return tape


def _unary(op, a: Node, value, backward_fn) -> Node:
    return a.tape._register(Node(op, value, a.tape, a.requires_grad, backward_fn))


def _binary(op, a: Node, b: Node, value, backward_fn) -> Node:
    tape = _same_tape(a, b)
    req = a.requires_grad or b.requires_grad
    return tape._register(Node(op, value, tape, req, backward_fn))


# ---------------------------------------------------------------------------
# primitives
# ---------------------------------------------------------------------------

def matmul(a: Node, b: Node) -> Node:
    """Dense product ``a @ b``."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    value = a.value @ b.value

    def bwd(g):
        if a.requires_grad:
            a._accumulate(g @ b.value.T)
        if b.requires_grad:
            b._accumulate(a.value.T @ g)

    return _binary("matmul", a, b, value, bwd)


def spmm(sparse: sp.spmatrix, b: Node) -> Node:
    """Sparse-constant times dense node, ``sparse @ b``.

    The sparse operand is a fixed coefficient matrix (propagation
    operator or feature matrix); no gradient flows into it.
    """
    if not sp.issparse(sparse):
        raise TypeError("first operand of spmm must be a scipy sparse matrix")
    if sparse.shape[1] != b.shape[0]:
        raise ValueError(f"spmm shape mismatch: {sparse.shape} @ {b.shape}")
    value = sparse @ b.value

    def bwd(g):
        if b.requires_grad:
            b._accumulate(sparse.T @ g)

    return _unary("spmm", b, value, bwd)


def add(a: Node, b: Node) -> Node:
    """Elementwise sum of two same-shape nodes."""
    if a.shape != b.shape:
        raise ValueError(f"add shape mismatch: {a.shape} vs {b.shape}")
    value = a.value + b.value

    def bwd(g):
        a._accumulate(g)
        b._accumulate(g)

    return _binary("add", a, b, value, bwd)


def hadamard(a: Node, b: Node) -> Node:
    """Elementwise product of two same-shape nodes."""
    if a.shape != b.shape:
        raise ValueError(f"hadamard shape mismatch: {a.shape} vs {b.shape}")
    value = a.value * b.value

    def bwd(g):
        if a.requires_grad:
            a._accumulate(g * b.value)
        if b.requires_grad:
            b._accumulate(g * a.value)

    return _binary("hadamard", a, b, value, bwd)


def relu(a: Node) -> Node:
    value = np.maximum(a.value, 0.0)

    def bwd(g):
        a._accumulate(g * (a.value > 0.0))

    return _unary("relu", a, value, bwd)


def row_softmax(a: Node) -> Node:
    """Softmax along each row, computed with max subtraction."""
    shifted = a.value - a.value.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    value = e / e.sum(axis=1, keepdims=True)

    def bwd(g):
        if a.requires_grad:
            inner = (g * value).sum(axis=1, keepdims=True)
            a._accumulate(value * (g - inner))

    return _unary("row_softmax", a, value, bwd)


def log(a: Node) -> Node:
    """Natural log of inputs clamped below at ``CLAMP_EPS``.

    Backward is 1/x on the live region and exactly 0 where the clamp
    engaged, matching finite differences of the clamped forward.
    """
    clamped = np.maximum(a.value, CLAMP_EPS)
    value = np.log(clamped)

    def bwd(g):
        if a.requires_grad:
            a._accumulate(g * np.where(a.value >= CLAMP_EPS, 1.0 / clamped, 0.0))

    return _unary("log", a, value, bwd)


def scale(a: Node, alpha: float) -> Node:
    """Multiply by a python scalar."""
    alpha = float(alpha)
    value = a.value * alpha

    def bwd(g):
        a._accumulate(g * alpha)

    return _unary("scale", a, value, bwd)


def row_broadcast(a: Node, num_cols: int) -> Node:
    """Broadcast an (n, 1) column to (n, num_cols)."""
    if a.shape[1] != 1:
        raise ValueError(f"row_broadcast expects an (n, 1) operand, got {a.shape}")
    value = np.broadcast_to(a.value, (a.shape[0], int(num_cols))).copy()

    def bwd(g):
        a._accumulate(g.sum(axis=1, keepdims=True))

    return _unary("row_broadcast", a, value, bwd)


def sum_all(a: Node) -> Node:
    """Reduce all entries to a (1, 1) scalar node."""
    value = np.array([[a.value.sum()]])

    def bwd(g):
        a._accumulate(g[0, 0])

    return _unary("sum", a, value, bwd)


def select_rows(a: Node, indices) -> Node:
    """Gather rows by index; repeated indices accumulate on backward."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= a.shape[0]):
        raise IndexError("select_rows index out of range")
    value = a.value[idx]

    def bwd(g):
        if a.requires_grad:
            if a.grad is None:
                a.grad = np.zeros_like(a.value)
            np.add.at(a.grad, idx, g)

    return _unary("select_rows", a, value, bwd)


def one_minus(a: Node) -> Node:
    """Elementwise complement ``1 - a``."""
    value = 1.0 - a.value

    def bwd(g):
        a._accumulate(-g)

    return _unary("one_minus", a, value, bwd)


def sigmoid(a: Node) -> Node:
    value = expit(a.value)

    def bwd(g):
        if a.requires_grad:
            a._accumulate(g * value * (1.0 - value))

    return _unary("sigmoid", a, value, bwd)


# ---------------------------------------------------------------------------
# backward pass
# ---------------------------------------------------------------------------

def backward(tape: Tape, loss: Node) -> list[np.ndarray]:
    """Propagate gradients from a scalar loss back to every leaf.

    Visits nodes in strict reverse construction order. Returns one
    gradient array per registered leaf, in registration order; leaves
    not reachable from the loss get zeros.
    """
    if loss.tape is not tape:
        raise ValueError("loss node does not belong to this tape")
    if loss.shape != (1, 1):
        raise ValueError(f"loss must be a (1, 1) scalar node, got {loss.shape}")
    loss.grad = np.ones((1, 1))
    for node in reversed(tape.nodes):
        if node.grad is None or node._backward_fn is None:
            continue
        node._backward_fn(node.grad)
    return [
        leaf.grad if leaf.grad is not None else np.zeros_like(leaf.value)
        for leaf in tape.leaves
    ]


def reset_grads(tape: Tape) -> None:
    """Clear every gradient on the tape.

    Required between repeated ``backward`` calls on one tape (for
    example per-node loss probes sharing a forward pass); without it
    the second call would accumulate onto stale gradients.
    """
    for node in tape.nodes:
        node.grad = None


# ---------------------------------------------------------------------------
# dropout helpers
# ---------------------------------------------------------------------------

def dropout_mask(shape, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout mask with entries in {0, 1/(1-rate)}.

    Multiplying by the mask keeps activation expectations unchanged, so
    evaluation needs no rescaling.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    keep = rng.random(shape) >= rate
    return keep.astype(np.float64) * (1.0 / (1.0 - rate))


def sparse_dropout(matrix: sp.csr_matrix, rate: float, rng: np.random.Generator) -> sp.csr_matrix:
    """Inverted dropout over the stored entries of a CSR matrix.

    Draws one uniform per stored entry, zeroes dropped entries out of
    the structure, and rescales survivors by 1/(1-rate). Structural
    zeros would be unchanged by a dense mask, so masking stored entries
    only gives the same output distribution at sparse cost.
    """
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    n = matrix.shape[0]
    keep = rng.random(matrix.nnz) >= rate
    data = matrix.data[keep] * (1.0 / (1.0 - rate))
    indices = matrix.indices[keep]
    row_ids = np.repeat(np.arange(n, dtype=np.int64), np.diff(matrix.indptr))
    counts = np.bincount(row_ids[keep], minlength=n)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(matrix.indptr.dtype)
    return sp.csr_matrix((data, indices, indptr), shape=matrix.shape)
