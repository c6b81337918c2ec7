"""Graph container and normalized-adjacency operator.

A :class:`Graph` is an undirected, unweighted graph with sparse node
features and one integer class label per node. The propagation operator
used by every model is the symmetrically normalized adjacency with self
loops, ``D^{-1/2} (A + I) D^{-1/2}``, wrapped in
:class:`NormalizedLaplacian`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Graph",
    "NormalizedLaplacian",
    "normalized_laplacian",
    "is_neighbor",
    "spmm",
]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph with node features and labels.

    Attributes
    ----------
    num_nodes, num_features, num_classes : int
        Shape of the problem. Class ids are dense in ``[0, num_classes)``.
    edges : ndarray of shape (m, 2)
        Canonical undirected edge list, each edge stored once with
        ``u < v``, sorted ascending by ``(u, v)``.
    adjacency : scipy.sparse.csr_matrix of shape (n, n)
        Symmetric 0/1 adjacency with zero diagonal, both directions stored.
    features : scipy.sparse.csr_matrix of shape (n, num_features)
        Row-major sparse float64 feature matrix.
    labels : ndarray of shape (n,)
        Integer class id per node.
    """

    num_nodes: int
    num_features: int
    num_classes: int
    edges: np.ndarray
    adjacency: sp.csr_matrix = field(repr=False)
    features: sp.csr_matrix = field(repr=False)
    labels: np.ndarray = field(repr=False)

    @classmethod
    def from_parts(
        cls,
        num_nodes: int,
        edges: np.ndarray,
        features,
        labels: np.ndarray,
        num_classes: int,
    ) -> "Graph":
        """Build and validate a Graph from raw parts.

        Parameters
        ----------
        num_nodes : int
            Number of nodes ``n``; node ids are ``0..n-1``.
        edges : array-like of shape (m, 2)
            Undirected edges. Any orientation accepted; duplicates and
            self loops are rejected.
        features : array-like or sparse, shape (n, d)
            Node features; stored as CSR float64.
        labels : array-like of shape (n,)
            Dense class ids in ``[0, num_classes)``.
        num_classes : int
            Number of classes ``c``.
        """
        if num_nodes <= 0:
            raise ValueError(f"num_nodes must be positive, got {num_nodes}")
        if num_classes <= 0:
            raise ValueError(f"num_classes must be positive, got {num_classes}")

        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= num_nodes:
                raise ValueError("edge endpoint out of range")
            if (edges[:, 0] == edges[:, 1]).any():
                bad = int(np.flatnonzero(edges[:, 0] == edges[:, 1])[0])
                raise ValueError(f"self loop at edge index {bad}")
        # Canonical form: u < v, sorted by (u, v), exactly once per edge.
        lo = edges.min(axis=1)
        hi = edges.max(axis=1)
        canon = np.stack([lo, hi], axis=1)
        order = np.lexsort((canon[:, 1], canon[:, 0]))
        canon = canon[order]
        if canon.shape[0] > 1 and (np.diff(canon, axis=0) == 0).all(axis=1).any():
            raise ValueError("duplicate edge in edge list")

        if sp.issparse(features):
            feats = features.tocsr().astype(np.float64)
        else:
            feats = sp.csr_matrix(np.asarray(features, dtype=np.float64))
        if feats.shape != (num_nodes, feats.shape[1]):
            raise ValueError("feature matrix row count does not match num_nodes")
        if not np.all(np.isfinite(feats.data)):
            raise ValueError("non-finite feature value")
        feats.sort_indices()

        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        if labels.shape[0] != num_nodes:
            raise ValueError("labels length does not match num_nodes")
        if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
            raise ValueError("label out of range [0, num_classes)")

        # Mirror the canonical list so the stored adjacency is symmetric
        # by construction.
        if canon.size:
            rows = np.concatenate([canon[:, 0], canon[:, 1]])
            cols = np.concatenate([canon[:, 1], canon[:, 0]])
            data = np.ones(rows.shape[0], dtype=np.float64)
        else:
            rows = cols = np.empty(0, dtype=np.int64)
            data = np.empty(0, dtype=np.float64)
        adj = sp.csr_matrix((data, (rows, cols)), shape=(num_nodes, num_nodes))
        adj.sort_indices()

        for a in (adj.data, adj.indices, adj.indptr, feats.data, feats.indices, feats.indptr):
            _freeze(a)

        return cls(
            num_nodes=num_nodes,
            num_features=int(feats.shape[1]),
            num_classes=num_classes,
            edges=_freeze(canon),
            adjacency=adj,
            features=feats,
            labels=_freeze(labels),
        )

    @property
    def num_edges(self) -> int:
        """Undirected edge count (each edge counted once)."""
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        """Node degrees without self loops."""
        return np.diff(self.adjacency.indptr).astype(np.int64)


@dataclass(frozen=True)
class NormalizedLaplacian:
    """Symmetrically normalized adjacency with self loops.

    ``matrix[i, j] = 1 / sqrt((deg_i + 1) * (deg_j + 1))`` for each edge
    (i, j) and for the diagonal (i, i). Symmetry holds bit-exactly: each
    off-diagonal value is computed once per undirected edge and mirrored.
    """

    matrix: sp.csr_matrix = field(repr=False)
    num_nodes: int = 0


def normalized_laplacian(graph: Graph) -> NormalizedLaplacian:
    """Build ``D^{-1/2} (A + I) D^{-1/2}`` for a graph.

    Eigenvalues of the result lie in ``[-1, 1]``.
    """
    n = graph.num_nodes
    deg = graph.degrees().astype(np.float64) + 1.0
    inv_sqrt = 1.0 / np.sqrt(deg)

    u = graph.edges[:, 0]
    v = graph.edges[:, 1]
    w = inv_sqrt[u] * inv_sqrt[v]  # one value per undirected edge, reused for both directions

    rows = np.concatenate([u, v, np.arange(n, dtype=np.int64)])
    cols = np.concatenate([v, u, np.arange(n, dtype=np.int64)])
    vals = np.concatenate([w, w, 1.0 / deg])

    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    mat.sort_indices()
    for a in (mat.data, mat.indices, mat.indptr):
        _freeze(a)
    return NormalizedLaplacian(matrix=mat, num_nodes=n)


def is_neighbor(graph: Graph, u: int, v: int) -> bool:
    """True if ``v`` is adjacent to ``u``; a node counts as its own neighbor.

    The self-as-neighbor convention keeps negative sampling from ever
    pairing a node with itself.
    """
    n = graph.num_nodes
    if not (0 <= u < n) or not (0 <= v < n):
        raise IndexError(f"node id out of range: ({u}, {v}) with n={n}")
    if u == v:
        return True
    indptr = graph.adjacency.indptr
    row = graph.adjacency.indices[indptr[u]:indptr[u + 1]]
    pos = np.searchsorted(row, v)
    return bool(pos < row.shape[0] and row[pos] == v)


def spmm(lap: NormalizedLaplacian, dense: np.ndarray) -> np.ndarray:
    """Sparse-dense product ``lap.matrix @ dense``.

    Row-major accumulation in stored (ascending) column order, so results
    are deterministic for a fixed operand layout.
    """
    dense = np.asarray(dense, dtype=np.float64)
    if dense.ndim != 2 or dense.shape[0] != lap.num_nodes:
        raise ValueError(
            f"shape mismatch: laplacian is {lap.num_nodes}x{lap.num_nodes}, "
            f"dense operand is {dense.shape}"
        )
    return lap.matrix @ dense
