"""Clustering agreement metrics: ACC, NMI, Purity, Precision, Recall, F-score, ARI.

All metrics are computed from the confusion (contingency) matrix in one
pass.  ACC matches predicted clusters to ground-truth classes with an
optimal assignment on the confusion matrix padded square with zeros;
precision, recall and F-score count sample pairs grouped together in each
partition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "MetricReport",
    "confusion",
    "accuracy",
    "nmi",
    "purity",
    "pairwise_prf",
    "ari",
    "evaluate_clustering",
]

# Column order used for serialization.
COLUMNS = ("ACC", "NMI", "Purity", "PER", "REC", "F-score", "ARI")


@dataclass
class MetricReport:
    acc: float
    nmi: float
    purity: float
    precision: float
    recall: float
    fscore: float
    ari: float

    def values(self):
        return (
            self.acc,
            self.nmi,
            self.purity,
            self.precision,
            self.recall,
            self.fscore,
            self.ari,
        )

    def to_line(self, delimiter="\t", precision=6):
        return delimiter.join(f"{v:.{precision}f}" for v in self.values())


def _as_labels(truth, pred):
    t = np.asarray(truth, dtype=int).ravel()
    p = np.asarray(pred, dtype=int).ravel()
    if t.shape[0] != p.shape[0]:
        raise ValueError(f"label lengths differ: {t.shape[0]} vs {p.shape[0]}")
    if t.shape[0] < 1:
        raise ValueError("need at least one sample")
    if t.min() < 0 or p.min() < 0:
        raise ValueError("labels must be nonnegative integers")
    return t, p


def confusion(truth, pred):
    """Contingency matrix N with N[i, j] = |class i intersect cluster j|."""
    t, p = _as_labels(truth, pred)
    kt, kp = t.max() + 1, p.max() + 1
    mat = np.zeros((kt, kp), dtype=np.int64)
    np.add.at(mat, (t, p), 1)
    return mat


def accuracy(truth, pred):
    """Fraction correct under the best cluster-to-class assignment."""
    mat = confusion(truth, pred)
    size = max(mat.shape)
    padded = np.zeros((size, size), dtype=np.int64)
    padded[: mat.shape[0], : mat.shape[1]] = mat
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return float(padded[rows, cols].sum()) / float(mat.sum())


def _entropy(counts, n):
    frac = counts[counts > 0] / n
    return float(-np.sum(frac * np.log(frac)))


def nmi(truth, pred, average="geometric"):
    """Normalized mutual information, I(T;P) over a mean of the entropies.

    ``average`` picks the normalizer: "geometric" (sqrt(H_T * H_P),
    default) or "arithmetic" ((H_T + H_P) / 2).  Degenerate partitions
    where the normalizer vanishes return 0 by the 0/0 -> 0 convention.
    """
    if average not in ("geometric", "arithmetic"):
        raise ValueError(f"unknown average {average!r}")
    mat = confusion(truth, pred)
    n = mat.sum()
    a = mat.sum(axis=1)
    b = mat.sum(axis=0)
    nz = mat > 0
    nij = mat[nz].astype(float)
    outer = np.outer(a, b)[nz].astype(float)
    mi = float(np.sum((nij / n) * np.log(n * nij / outer)))
    ht, hp = _entropy(a, n), _entropy(b, n)
    denom = np.sqrt(ht * hp) if average == "geometric" else (ht + hp) / 2.0
    if denom <= 0:
        return 0.0
    return min(mi / denom, 1.0)


def purity(truth, pred):
    """Fraction of samples in the majority class of their predicted cluster."""
    mat = confusion(truth, pred)
    return float(mat.max(axis=0).sum()) / float(mat.sum())


def _pair_counts(mat):
    def comb2(x):
        x = x.astype(float)
        return np.sum(x * (x - 1.0) / 2.0)

    tp = comb2(mat[mat > 0])
    same_truth = comb2(mat.sum(axis=1))
    same_pred = comb2(mat.sum(axis=0))
    return tp, same_truth, same_pred


def pairwise_prf(truth, pred):
    """(precision, recall, fscore) over sample pairs grouped together."""
    mat = confusion(truth, pred)
    tp, same_truth, same_pred = _pair_counts(mat)
    precision = tp / same_pred if same_pred > 0 else 0.0
    recall = tp / same_truth if same_truth > 0 else 0.0
    fscore = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return float(precision), float(recall), float(fscore)


def ari(truth, pred):
    """Adjusted Rand index (pair counting, chance-corrected).

    Returns 1.0 when the adjusted denominator vanishes, i.e. both
    partitions are pair-trivial and identical.
    """
    mat = confusion(truth, pred)
    n = mat.sum()
    tp, same_truth, same_pred = _pair_counts(mat)
    total = n * (n - 1.0) / 2.0
    expected = same_truth * same_pred / total if total > 0 else 0.0
    denom = (same_truth + same_pred) / 2.0 - expected
    if denom == 0:
        return 1.0
    return float((tp - expected) / denom)


def evaluate_clustering(truth, pred, nmi_average="geometric"):
    """All seven metrics in one MetricReport."""
    pre, rec, f = pairwise_prf(truth, pred)
    return MetricReport(
        acc=accuracy(truth, pred),
        nmi=nmi(truth, pred, average=nmi_average),
        purity=purity(truth, pred),
        precision=pre,
        recall=rec,
        fscore=f,
        ari=ari(truth, pred),
    )
