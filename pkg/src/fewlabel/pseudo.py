"""Pseudo-labeling with adaptive selection, balancing, and negatives.

Three pieces combine into one training objective:

* adaptive selection: only unlabeled nodes whose top predicted
  probability reaches a confidence threshold receive a pseudo label,
  and the set is rebuilt from scratch every epoch;
* balancing: each selected node is weighted by the reciprocal of its
  pseudo class's size inside the selected set, so every class
  contributes the same total weight;
* negative sampling: random (positive, non-neighbor) pairs are pushed
  apart by a complement cross-entropy term.

Pseudo labels, weights, and sampled pairs are computed from a detached
copy of F and enter the loss as constants: gradients flow through model
outputs only, never through the selection itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .graph import Graph, is_neighbor

__all__ = [
    "PseudoConfig",
    "LabelAssignment",
    "AdaptiveSet",
    "NegativeSample",
    "pseudo_labels",
    "adaptive_pseudo_labels",
    "balancing_factors",
    "sample_negatives",
    "cross_entropy",
    "supervised_loss",
    "baseline_pseudo_loss",
    "negative_loss",
    "combined_loss",
]

logger = logging.getLogger(__name__)

_RESAMPLE_CAP = 100_000  # structural safety net; unreachable on valid graphs

# Negative-sample sizes tuned jointly so positives*negatives = 10.
CANONICAL_SAMPLE_SIZES = ((0, 0), (1, 10), (2, 5), (5, 2), (10, 1))


@dataclass
class PseudoConfig:
    """Knobs for the pseudo-label objective.

    ``pseudo_weight`` scales the pseudo term, ``threshold`` is the
    confidence cutoff for adaptive selection, ``negative_weight``
    scales the negative-sampling term fed by ``num_positives`` x
    ``num_negatives`` pairs per epoch. ``adaptive=False`` switches to
    plain pseudo-labeling: every unlabeled node participates with a
    uniform 1/|U| weight and the threshold is ignored.
    """

    pseudo_weight: float = 1.0
    threshold: float = 0.2
    balancing: bool = True
    negative_weight: float = 0.0
    num_positives: int = 0
    num_negatives: int = 0
    adaptive: bool = True

    def validate(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.pseudo_weight < 0.0 or self.negative_weight < 0.0:
            raise ValueError("loss weights must be non-negative")
        if self.num_positives < 0 or self.num_negatives < 0:
            raise ValueError("sample sizes must be non-negative")
        if (self.num_positives == 0) != (self.num_negatives == 0):
            raise ValueError("num_positives and num_negatives must be zero together")
        if self.negative_weight > 0.0 and self.num_positives == 0:
            raise ValueError("negative_weight > 0 requires non-zero sample sizes")


@dataclass(frozen=True)
class LabelAssignment:
    """Hard label and confidence for every node, from one F snapshot.

    ``labels[i]`` is the argmax class of row i (ties -> lowest class
    id); ``confidence[i]`` is that row's maximum probability.
    """

    labels: np.ndarray
    confidence: np.ndarray


@dataclass(frozen=True)
class AdaptiveSet:
    """Unlabeled nodes selected for pseudo-supervision this epoch.

    ``members`` (node ids), their pseudo ``labels``, and per-node loss
    ``weights``. Weights are None until :func:`balancing_factors` runs.
    """

    members: np.ndarray
    labels: np.ndarray
    weights: np.ndarray | None = None

    @property
    def size(self) -> int:
        return int(self.members.shape[0])


@dataclass(frozen=True)
class NegativeSample:
    """Sampled (positive, non-neighbor) index pairs for one epoch.

    ``positives`` has shape (p,), ``negatives`` (p, j): row i holds the
    j negatives drawn for positive i. Both sampled with replacement.
    """

    positives: np.ndarray
    negatives: np.ndarray

    @property
    def num_pairs(self) -> int:
        return int(self.negatives.size)


def _empty_sample() -> NegativeSample:
    return NegativeSample(
        positives=np.empty(0, dtype=np.int64),
        negatives=np.empty((0, 0), dtype=np.int64),
    )


def pseudo_labels(probs: np.ndarray) -> LabelAssignment:
    """Argmax class and max probability per row of a detached F."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2:
        raise ValueError(f"probs must be 2-D, got shape {probs.shape}")
    return LabelAssignment(
        labels=probs.argmax(axis=1).astype(np.int64),
        confidence=probs.max(axis=1),
    )


def adaptive_pseudo_labels(probs: np.ndarray, unlabeled: np.ndarray, threshold: float) -> AdaptiveSet:
    """Select unlabeled nodes whose confidence reaches ``threshold``.

    Inclusive comparison: a node at exactly the threshold is selected.
    The result has no weights yet; apply :func:`balancing_factors`.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    unlabeled = np.asarray(unlabeled, dtype=np.int64)
    assignment = pseudo_labels(probs)
    picked = assignment.confidence[unlabeled] >= threshold
    members = unlabeled[picked]
    return AdaptiveSet(members=members, labels=assignment.labels[members])


def balancing_factors(aset: AdaptiveSet, balancing: bool) -> AdaptiveSet:
    """Attach loss weights to an adaptive set.

    With balancing on, each member weighs 1/N where N is the number of
    selected nodes sharing its pseudo class, so classes contribute
    equally regardless of size. Off, every member weighs 1/|set|
    (a plain mean).
    """
    if aset.size == 0:
        return AdaptiveSet(aset.members, aset.labels, np.empty(0, dtype=np.float64))
    if balancing:
        counts = np.bincount(aset.labels)
        weights = 1.0 / counts[aset.labels]
    else:
        weights = np.full(aset.size, 1.0 / aset.size)
    return AdaptiveSet(aset.members, aset.labels, weights)


def sample_negatives(
    graph: Graph,
    pool: np.ndarray,
    num_positives: int,
    num_negatives: int,
    rng: np.random.Generator,
) -> NegativeSample:
    """Draw positives from ``pool`` and non-neighbors for each.

    Positives are uniform over the pool with replacement; a positive
    adjacent to every other node is skipped and redrawn. Negatives are
    uniform over non-neighbors via rejection (self counts as a
    neighbor), drawn with replacement. Draw order is fixed: positive i,
    then its negatives, then positive i+1.

    Empty pool with positives requested logs a warning and returns an
    empty sample.
    """
    if num_positives < 0 or num_negatives < 0:
        raise ValueError("sample sizes must be non-negative")
    if num_positives == 0 or num_negatives == 0:
        return _empty_sample()
    pool = np.asarray(pool, dtype=np.int64)
    if pool.size == 0:
        logger.warning("negative sampling skipped: positive pool is empty")
        return _empty_sample()

    n = graph.num_nodes
    degrees = graph.degrees()
    positives = np.empty(num_positives, dtype=np.int64)
    negatives = np.empty((num_positives, num_negatives), dtype=np.int64)
    for i in range(num_positives):
        for attempt in range(_RESAMPLE_CAP):
            p = int(pool[rng.integers(pool.size)])
            if degrees[p] < n - 1:  # at least one non-neighbor exists
                break
        else:
            raise RuntimeError("no pool node has a non-neighbor; graph too dense to sample")
        positives[i] = p
        for j in range(num_negatives):
            for attempt in range(_RESAMPLE_CAP):
                cand = int(rng.integers(n))
                if not is_neighbor(graph, p, cand):
                    negatives[i, j] = cand
                    break
            else:
                raise RuntimeError("negative rejection sampling failed to terminate")
    return NegativeSample(positives=positives, negatives=negatives)


# ---------------------------------------------------------------------------
# losses (built from autodiff primitives; selection enters as constants)
# ---------------------------------------------------------------------------

def _one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError("label out of range for one-hot encoding")
    out = np.zeros((labels.size, num_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def cross_entropy(probs: ad.Node, target: np.ndarray) -> ad.Node:
    """Cross-entropy ``-sum(target * ln(probs))`` as a scalar node.

    ``target`` must be one-hot per row and match the probs shape. Probs
    are clamped at 1e-12 inside :func:`fewlabel.autodiff.log`.
    """
    target = np.asarray(target, dtype=np.float64)
    if target.ndim == 1:
        target = target[None, :]
    if target.shape != probs.shape:
        raise ValueError(f"target shape {target.shape} != probs shape {probs.shape}")
    if not np.all((target == 0.0) | (target == 1.0)) or not np.all(target.sum(axis=1) == 1.0):
        raise ValueError("target rows must be one-hot")
    tgt = probs.tape.constant(target)
    return ad.scale(ad.sum_all(ad.hadamard(tgt, ad.log(probs))), -1.0)


def _ce_sum(F: ad.Node, ids: np.ndarray, labels: np.ndarray, num_classes: int,
            weights: np.ndarray | None = None) -> ad.Node:
    """-sum_i w_i * ln(F[ids[i], labels[i]]) on the tape of F."""
    tape = F.tape
    rows = ad.select_rows(F, ids)
    picked = ad.hadamard(tape.constant(_one_hot(labels, num_classes)), ad.log(rows))
    if weights is not None:
        w = tape.constant(np.asarray(weights, dtype=np.float64).reshape(-1, 1))
        picked = ad.hadamard(picked, ad.row_broadcast(w, num_classes))
    return ad.scale(ad.sum_all(picked), -1.0)


def supervised_loss(F: ad.Node, labeled: np.ndarray, labels: np.ndarray, num_classes: int) -> ad.Node:
    """Mean cross-entropy over the labeled set."""
    labeled = np.asarray(labeled, dtype=np.int64)
    if labeled.size == 0:
        raise ValueError("labeled set is empty")
    return ad.scale(_ce_sum(F, labeled, np.asarray(labels)[labeled], num_classes), 1.0 / labeled.size)


def baseline_pseudo_loss(
    F: ad.Node,
    labeled: np.ndarray,
    labels: np.ndarray,
    unlabeled: np.ndarray,
    assignment: LabelAssignment,
    pseudo_weight: float,
    num_classes: int,
) -> ad.Node:
    """Plain pseudo-label objective: every unlabeled node participates.

    Mean supervised cross-entropy plus ``pseudo_weight`` times the mean
    cross-entropy of all unlabeled nodes against their argmax labels.
    No selection, no balancing, no negatives.
    """
    unlabeled = np.asarray(unlabeled, dtype=np.int64)
    sup = supervised_loss(F, labeled, labels, num_classes)
    if unlabeled.size == 0 or pseudo_weight == 0.0:
        return sup
    pseudo = _ce_sum(F, unlabeled, assignment.labels[unlabeled], num_classes)
    return ad.add(sup, ad.scale(pseudo, pseudo_weight / unlabeled.size))


def negative_loss(F: ad.Node, sample: NegativeSample, positive_labels: np.ndarray,
                  num_classes: int) -> ad.Node:
    """Mean complement cross-entropy over sampled pairs.

    For each pair (i, j): -ln(1 - F[j, label_i]), pushing node j away
    from the positive's class. Empty sample contributes a constant 0.
    """
    if sample.num_pairs == 0:
        return F.tape.constant(np.zeros((1, 1)))
    p, j = sample.negatives.shape
    flat_ids = sample.negatives.reshape(-1)
    flat_labels = np.repeat(np.asarray(positive_labels, dtype=np.int64), j)
    rows = ad.log(ad.one_minus(ad.select_rows(F, flat_ids)))
    picked = ad.hadamard(F.tape.constant(_one_hot(flat_labels, num_classes)), rows)
    return ad.scale(ad.sum_all(picked), -1.0 / (p * j))


def combined_loss(
    F: ad.Node,
    labeled: np.ndarray,
    labels: np.ndarray,
    aset: AdaptiveSet,
    sample: NegativeSample,
    positive_labels: np.ndarray | None,
    pseudo_weight: float,
    negative_weight: float,
    num_classes: int,
) -> ad.Node:
    """Full training objective: supervised + weighted pseudo + negatives.

    ``(1/|L|) sum CE + pseudo_weight * sum_i w_i CE_i + negative_weight
    * mean-pair complement CE``. Terms with zero weight or empty inputs
    are omitted from the tape entirely, so switching them off reduces
    the computation (and its gradients) to exactly the remaining terms.
    """
    loss = supervised_loss(F, labeled, labels, num_classes)
    if aset.size > 0 and pseudo_weight != 0.0:
        if aset.weights is None:
            raise ValueError("adaptive set has no weights; run balancing_factors first")
        pseudo = _ce_sum(F, aset.members, aset.labels, num_classes, weights=aset.weights)
        loss = ad.add(loss, ad.scale(pseudo, pseudo_weight))
    if sample.num_pairs > 0 and negative_weight != 0.0:
        if positive_labels is None:
            raise ValueError("positive_labels required when the negative sample is non-empty")
        neg = negative_loss(F, sample, positive_labels, num_classes)
        loss = ad.add(loss, ad.scale(neg, negative_weight))
    return loss
