"""Dataset bundle IO and the benchmark split protocol.

A bundle is a directory of four plain-text files:

* ``meta.json`` — ``{"name", "num_nodes", "num_edges", "num_features",
  "num_classes"}``; the edge count is undirected and deduplicated.
* ``edges.txt`` — one ``"u v"`` pair per line in ASCII decimal with
  ``u < v``, sorted ascending by (u, v).
* ``features.txt`` — line i holds node i's nonzeros as ``idx:value``
  pairs, space separated, indices strictly ascending, values in
  shortest round-trip decimal. An empty line is an all-zero row.
* ``labels.txt`` — line i is node i's class id.

Splits follow a fixed protocol: ``per_class`` training nodes drawn per
class (class 0 first), then 500 validation nodes, then 1000 test nodes,
all without replacement from what remains, deterministically from the
split seed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph

__all__ = [
    "BundleError",
    "load_bundle",
    "save_bundle",
    "Split",
    "make_split",
    "label_rate",
    "VAL_SIZE",
    "TEST_SIZE",
]

VAL_SIZE = 500
TEST_SIZE = 1000

_META_KEYS = ("name", "num_nodes", "num_edges", "num_features", "num_classes")


class BundleError(Exception):
    """Malformed bundle; carries the offending file and line."""

    def __init__(self, filename: str, line: int | None, message: str):
        where = f"{filename}:{line}" if line is not None else filename
        super().__init__(f"{where}: {message}")
        self.filename = filename
        self.line = line
        self.message = message


def _read_lines(path: str, filename: str) -> list[str]:
    if not os.path.exists(path):
        raise BundleError(filename, None, "file missing")
    with open(path, "r", encoding="ascii") as fh:
        text = fh.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline after the final record
    return lines


def load_bundle(path: str) -> Graph:
    """Load and validate a bundle directory into a :class:`Graph`."""
    meta_path = os.path.join(path, "meta.json")
    if not os.path.exists(meta_path):
        raise BundleError("meta.json", None, f"file missing in {path}")
    with open(meta_path, "r", encoding="utf-8") as fh:
        try:
            meta = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BundleError("meta.json", None, f"invalid JSON: {exc}") from exc
    for key in _META_KEYS:
        if key not in meta:
            raise BundleError("meta.json", None, f"missing key {key!r}")
    n = int(meta["num_nodes"])
    d = int(meta["num_features"])
    c = int(meta["num_classes"])

    # --- edges ---
    edge_lines = _read_lines(os.path.join(path, "edges.txt"), "edges.txt")
    edges = np.empty((len(edge_lines), 2), dtype=np.int64)
    seen: set[tuple[int, int]] = set()
    for i, line in enumerate(edge_lines, start=1):
        parts = line.split(" ")
        if len(parts) != 2:
            raise BundleError("edges.txt", i, f"expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise BundleError("edges.txt", i, f"non-integer endpoint in {line!r}")
        if u == v:
            raise BundleError("edges.txt", i, f"self loop on node {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise BundleError("edges.txt", i, f"endpoint out of range in {line!r}")
        if u >= v:
            raise BundleError("edges.txt", i, f"edge not in canonical u < v form: {line!r}")
        if (u, v) in seen:
            raise BundleError("edges.txt", i, f"duplicate edge {u} {v}")
        seen.add((u, v))
        edges[i - 1] = (u, v)
    if len(edge_lines) != int(meta["num_edges"]):
        raise BundleError(
            "edges.txt", None,
            f"meta declares {meta['num_edges']} edges but file has {len(edge_lines)}",
        )

    # --- features ---
    feat_lines = _read_lines(os.path.join(path, "features.txt"), "features.txt")
    if len(feat_lines) != n:
        raise BundleError("features.txt", None,
                          f"expected {n} rows, found {len(feat_lines)}")
    rows, cols, vals = [], [], []
    for i, line in enumerate(feat_lines, start=1):
        if line == "":
            continue
        prev = -1
        for token in line.split(" "):
            idx_s, _, val_s = token.partition(":")
            try:
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise BundleError("features.txt", i, f"malformed token {token!r}")
            if not 0 <= idx < d:
                raise BundleError("features.txt", i, f"feature index {idx} out of range")
            if idx <= prev:
                raise BundleError("features.txt", i,
                                  f"feature indices not strictly ascending at {idx}")
            if not np.isfinite(val):
                raise BundleError("features.txt", i, f"non-finite value {val_s!r}")
            prev = idx
            rows.append(i - 1)
            cols.append(idx)
            vals.append(val)
    features = sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64),
         (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(n, d),
    )

    # --- labels ---
    label_lines = _read_lines(os.path.join(path, "labels.txt"), "labels.txt")
    if len(label_lines) != n:
        raise BundleError("labels.txt", None,
                          f"expected {n} rows, found {len(label_lines)}")
    labels = np.empty(n, dtype=np.int64)
    for i, line in enumerate(label_lines, start=1):
        try:
            lab = int(line)
        except ValueError:
            raise BundleError("labels.txt", i, f"non-integer label {line!r}")
        if not 0 <= lab < c:
            raise BundleError("labels.txt", i, f"label {lab} out of range [0, {c})")
        labels[i - 1] = lab

    return Graph.from_parts(n, edges, features, labels, c)


def save_bundle(graph: Graph, path: str, name: str) -> None:
    """Write a graph as a bundle directory (inverse of load_bundle)."""
    os.makedirs(path, exist_ok=True)
    meta = {
        "name": name,
        "num_nodes": graph.num_nodes,
        "num_edges": graph.num_edges,
        "num_features": graph.num_features,
        "num_classes": graph.num_classes,
    }
    with open(os.path.join(path, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(path, "edges.txt"), "w", encoding="ascii") as fh:
        for u, v in graph.edges:
            fh.write(f"{u} {v}\n")
    feats = graph.features
    with open(os.path.join(path, "features.txt"), "w", encoding="ascii") as fh:
        for i in range(graph.num_nodes):
            lo, hi = feats.indptr[i], feats.indptr[i + 1]
            pairs = (
                f"{feats.indices[k]}:{repr(float(feats.data[k]))}"
                for k in range(lo, hi)
            )
            fh.write(" ".join(pairs))
            fh.write("\n")
    with open(os.path.join(path, "labels.txt"), "w", encoding="ascii") as fh:
        for lab in graph.labels:
            fh.write(f"{lab}\n")


# ---------------------------------------------------------------------------
# splits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Split:
    """Train/validation/test node-id sets for one benchmark run.

    Plain container; :func:`make_split` is the constructor that
    guarantees the protocol invariants (sizes and disjointness).
    """

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int


def make_split(graph: Graph, per_class: int, seed: int) -> Split:
    """Sample a split: per-class train nodes, then 500 val, then 1000 test.

    Training nodes are drawn class by class in ascending class order;
    validation and test sets are then drawn from the remaining nodes.
    All draws are without replacement from a generator seeded with
    ``seed``, so the same arguments always give the same split.
    """
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    n, c = graph.num_nodes, graph.num_classes
    needed = per_class * c + VAL_SIZE + TEST_SIZE
    if n < needed:
        raise ValueError(
            f"graph has {n} nodes but the protocol needs at least {needed} "
            f"({per_class}/class + {VAL_SIZE} val + {TEST_SIZE} test)"
        )
    rng = np.random.default_rng(seed)
    train_parts = []
    for cls in range(c):
        candidates = np.flatnonzero(graph.labels == cls)
        if candidates.size < per_class:
            raise ValueError(
                f"class {cls} has only {candidates.size} nodes, "
                f"cannot draw {per_class} training nodes"
            )
        train_parts.append(rng.permutation(candidates)[:per_class])
    train = np.sort(np.concatenate(train_parts)).astype(np.int64)
    rest = np.setdiff1d(np.arange(n, dtype=np.int64), train)
    val = np.sort(rng.permutation(rest)[:VAL_SIZE]).astype(np.int64)
    rest = np.setdiff1d(rest, val)
    test = np.sort(rng.permutation(rest)[:TEST_SIZE]).astype(np.int64)
    return Split(train=train, val=val, test=test, seed=seed)


def label_rate(split: Split, graph: Graph) -> float:
    """Fraction of all nodes carrying a training label."""
    return split.train.size / graph.num_nodes
