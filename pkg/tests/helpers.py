"""Shared test utilities: graph builders and independent oracles.

The reference forwards here are deliberately written as straight dense
numpy compositions (no tape, no package ops) so they can disagree with
the library if the library is wrong.
"""

import numpy as np

import fewlabel as fl


def build_random_graph(rng, n=8, d=5, c=3, p=0.35):
    """Random connected-ish graph with non-negative features."""
    edges = [(i, (i + 1) % n) for i in range(n - 1)]  # path backbone
    for i in range(n):
        for j in range(i + 1, n):
            if (i, j) not in edges and rng.random() < p:
                edges.append((i, j))
    X = np.abs(rng.standard_normal((n, d)))
    y = rng.integers(0, c, n)
    y[:c] = np.arange(c)  # every class present
    return fl.Graph.from_parts(n, edges, X, y, c)


def two_block_graph(seed=0, p_in=0.6):
    """20-node toy: two dense clusters joined by a single bridge edge."""
    rng = np.random.default_rng(seed)
    edges = set()
    for base in (0, 10):
        for i in range(10):
            for j in range(i + 1, 10):
                if rng.random() < p_in:
                    edges.add((base + i, base + j))
    edges.add((4, 14))
    X = np.zeros((20, 8))
    X[:10, :4] = rng.random((10, 4)) + 0.5
    X[10:, 4:] = rng.random((10, 4)) + 0.5
    y = np.array([0] * 10 + [1] * 10)
    return fl.Graph.from_parts(20, sorted(edges), X, y, 2)


def row_softmax_ref(z):
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def gcn_reference(a_hat, x, w1, w2):
    """Dense eval-mode GCN: softmax(A relu(A X W1) W2)."""
    h = np.maximum(a_hat @ x @ w1, 0.0)
    return row_softmax_ref(a_hat @ h @ w2)


def dagnn_reference(a_hat, x, m1, m2, s, depth, score_activation="sigmoid",
                    include_level_zero=False):
    """Dense eval-mode DAGNN with explicit matrix powers."""
    z = np.maximum(x @ m1, 0.0) @ m2
    total = np.zeros_like(z)
    levels = range(0, depth + 1) if include_level_zero else range(1, depth + 1)
    for level in levels:
        h = np.linalg.matrix_power(a_hat, level) @ z
        score = h @ s
        if score_activation == "sigmoid":
            score = 1.0 / (1.0 + np.exp(-score))
        total = total + h * score
    return row_softmax_ref(total)


def finite_diff(loss_fn, arrays, eps=1e-6):
    """Central-difference gradients of loss_fn w.r.t. each array entry."""
    grads = [np.zeros_like(a) for a in arrays]
    for k, a in enumerate(arrays):
        for idx in np.ndindex(a.shape):
            orig = a[idx]
            a[idx] = orig + eps
            up = loss_fn(arrays)
            a[idx] = orig - eps
            dn = loss_fn(arrays)
            a[idx] = orig
            grads[k][idx] = (up - dn) / (2.0 * eps)
    return grads
