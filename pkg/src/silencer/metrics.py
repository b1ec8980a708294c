"""Partition quality scores built on a shared contingency table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import Graph, Partition


def _labels(x) -> np.ndarray:
    return x.labels if isinstance(x, Partition) else Partition.from_labels(x).labels


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray
    n: int

    @classmethod
    def build(cls, x, y) -> "ContingencyTable":
        a, b = _labels(x), _labels(y)
        if a.size != b.size:
            raise ValidationError(f"partitions differ in length: {a.size} vs {b.size}")
        _, ai = np.unique(a, return_inverse=True)
        _, bi = np.unique(b, return_inverse=True)
        counts = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
        np.add.at(counts, (ai, bi), 1)
        return cls(counts, int(a.size))


def _entropy(counts: np.ndarray, n: int) -> float:
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(x, y) -> float:
    """Normalized mutual information ``2 I(X;Y) / (H(X) + H(Y))`` (natural log).

    Two single-cluster partitions score 1 by convention.
    """
    t = ContingencyTable.build(x, y)
    hx = _entropy(t.counts.sum(axis=1), t.n)
    hy = _entropy(t.counts.sum(axis=0), t.n)
    if hx + hy == 0.0:
        return 1.0
    nz = t.counts > 0
    pxy = t.counts[nz] / t.n
    px = (t.counts.sum(axis=1) / t.n)[:, None]
    py = (t.counts.sum(axis=0) / t.n)[None, :]
    outer = (px * py)[nz]
    mi = float(np.sum(pxy * np.log(pxy / outer)))
    return float(np.clip(2.0 * mi / (hx + hy), 0.0, 1.0))


def _comb2(v):
    v = np.asarray(v, dtype=np.int64)
    return v * (v - 1) // 2


def ari(x, y) -> float:
    t = ContingencyTable.build(x, y)
    index = int(_comb2(t.counts).sum())
    sa = int(_comb2(t.counts.sum(axis=1)).sum())
    sb = int(_comb2(t.counts.sum(axis=0)).sum())
    total = t.n * (t.n - 1) // 2
    if total == 0:
        return 1.0
    expected = sa * sb / total
    maximum = 0.5 * (sa + sb)
    if maximum == expected:
        # both partitions trivial (all singletons or one cluster)
        return 1.0
    return (index - expected) / (maximum - expected)


def pairwise_f1(pred, truth) -> float:
    """Pair-counting F1: a pair is positive when both nodes share a community.

    Returns 0 when either side has no positive pairs.
    """
    t = ContingencyTable.build(pred, truth)
    tp = int(_comb2(t.counts).sum())
    pred_pos = int(_comb2(t.counts.sum(axis=1)).sum())
    true_pos = int(_comb2(t.counts.sum(axis=0)).sum())
    if pred_pos == 0 or true_pos == 0 or tp == 0:
        return 0.0
    precision = tp / pred_pos
    recall = tp / true_pos
    return 2 * precision * recall / (precision + recall)


def modularity(g: Graph, part) -> float:
    """Newman modularity ``(1/2m) sum_ij (A_ij - k_i k_j / 2m) [c_i == c_j]``.

    Evaluated per community as ``sum_c (in_c / 2m - (deg_c / 2m)^2)`` where
    ``in_c`` sums ``A_ij`` over ordered pairs inside ``c``.
    """
    a = g.adjacency
    if not g.symmetric:
        raise ValidationError("modularity needs a symmetric adjacency")
    labels = _labels(part)
    if labels.size != g.n:
        raise ValidationError(f"partition has {labels.size} labels for {g.n} nodes")
    two_m = float(a.sum())
    if two_m == 0:
        raise ValidationError("modularity is undefined on an edgeless graph")
    k = labels.max() + 1
    onehot = np.zeros((g.n, k))
    onehot[np.arange(g.n), labels] = 1.0
    inside = np.einsum("ic,ij,jc->c", onehot, a, onehot)
    deg = onehot.T @ a.sum(axis=1)
    return float(np.sum(inside / two_m - (deg / two_m) ** 2))


def evaluate_all(pred, truth) -> dict:
    return {"nmi": nmi(pred, truth), "ari": ari(pred, truth), "f1": pairwise_f1(pred, truth)}
