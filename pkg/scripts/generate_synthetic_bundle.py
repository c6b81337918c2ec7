"""Generate the committed synthetic benchmark bundle.

Stochastic block model with imbalanced classes plus sparse binary
features drawn mostly from class-specific token blocks.  The defaults
reproduce data/synthetic exactly; regenerate with

    python scripts/generate_synthetic_bundle.py --out data/synthetic
"""

import argparse

import numpy as np

import fewlabel as fl


def block_model_edges(sizes, deg_in, deg_out, rng):
    n = int(sum(sizes))
    bounds = np.cumsum([0] + list(sizes))
    labels = np.empty(n, dtype=np.int64)
    for k, (lo, hi) in enumerate(zip(bounds[:-1], bounds[1:])):
        labels[lo:hi] = k
    rows, cols = np.triu_indices(n, k=1)
    same = labels[rows] == labels[cols]
    p = np.where(same, 0.0, deg_out / n)
    for k, size in enumerate(sizes):
        mask = same & (labels[rows] == k)
        p[mask] = deg_in / max(1, size - 1)
    keep = rng.random(rows.size) < p
    edges = np.stack([rows[keep], cols[keep]], axis=1)
    return edges, labels


def block_features(labels, num_classes, dims_per_class, mean_tokens, own_prob, rng):
    n = labels.size
    d = num_classes * dims_per_class
    x = np.zeros((n, d))
    for i in range(n):
        tokens = 1 + rng.poisson(mean_tokens - 1)
        own = rng.random(tokens) < own_prob
        dims = np.where(
            own,
            labels[i] * dims_per_class + rng.integers(0, dims_per_class, tokens),
            rng.integers(0, d, tokens),
        )
        x[i, dims] = 1.0
    return x


def connect_isolated(edges, labels, sizes, rng):
    """Attach each isolated node to a random same-class peer."""
    n = labels.size
    degree = np.bincount(edges.ravel(), minlength=n)
    extra = []
    for i in np.flatnonzero(degree == 0):
        peers = np.flatnonzero(labels == labels[i])
        peers = peers[peers != i]
        j = int(rng.choice(peers))
        extra.append((min(i, j), max(i, j)))
    if extra:
        edges = np.concatenate([edges, np.array(extra, dtype=np.int64)])
    return edges


def build(args):
    rng = np.random.default_rng(args.seed)
    sizes = [int(s) for s in args.sizes.split(",")]
    edges, labels = block_model_edges(sizes, args.deg_in, args.deg_out, rng)
    edges = connect_isolated(edges, labels, sizes, rng)
    features = block_features(
        labels, len(sizes), args.dims_per_class, args.mean_tokens, args.own_prob, rng
    )
    # shuffle node ids so class blocks are not contiguous on disk
    perm = rng.permutation(labels.size)
    inverse = np.argsort(perm)
    edges = inverse[edges]
    edges = np.stack([edges.min(axis=1), edges.max(axis=1)], axis=1)
    return fl.Graph.from_parts(
        labels.size, edges, features[perm], labels[perm], len(sizes)
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--name", default="synthetic")
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--sizes", default="700,500,350,250")
    parser.add_argument("--deg-in", type=float, default=5.0)
    parser.add_argument("--deg-out", type=float, default=4.0)
    parser.add_argument("--dims-per-class", type=int, default=11)
    parser.add_argument("--mean-tokens", type=float, default=4.0)
    parser.add_argument("--own-prob", type=float, default=0.3)
    args = parser.parse_args()

    graph = build(args)
    fl.save_bundle(graph, args.out, name=args.name)
    degree = np.bincount(graph.edges.ravel(), minlength=graph.num_nodes)
    print(f"wrote {args.out}: {graph.num_nodes} nodes, {graph.num_edges} edges")
    print(f"mean degree {degree.mean():.2f}, min {degree.min()}, max {degree.max()}")


if __name__ == "__main__":
    main()
