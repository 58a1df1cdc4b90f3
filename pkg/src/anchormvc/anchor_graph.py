"""Anchor selection and per-view sparse bipartite graph construction.

A bipartite graph is a plain (n, m) float ndarray linking n samples to m
anchors: entries are nonnegative, each row sums to 1, and construction
leaves at most k nonzeros per row.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.cluster import KMeans

__all__ = [
    "ViewDataset",
    "AnchorSet",
    "check_bipartite",
    "select_anchors",
    "build_bipartite",
    "build_all_views",
]


@dataclass
class ViewDataset:
    """Multi-view data: one (n, d_v) feature matrix per view, optional labels."""

    views: list
    labels: np.ndarray | None = None

    def __post_init__(self):
        if len(self.views) < 1:
            raise ValueError("at least one view is required")
        self.views = [np.asarray(v, dtype=float) for v in self.views]
        counts = {v.shape[0] for v in self.views}
        if len(counts) != 1:
            raise ValueError(f"views disagree on sample count: {sorted(counts)}")
        if self.n < 2:
            raise ValueError(f"need at least 2 samples, got {self.n}")
        for i, v in enumerate(self.views):
            if v.ndim != 2:
                raise ValueError(f"view {i} is not a matrix (shape {v.shape})")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"view {i} contains non-finite entries")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int).ravel()
            if self.labels.shape[0] != self.n:
                raise ValueError(
                    f"labels length {self.labels.shape[0]} != sample count {self.n}"
                )

    @property
    def n(self):
        return self.views[0].shape[0]

    @property
    def n_views(self):
        return len(self.views)

    @property
    def dims(self):
        return [v.shape[1] for v in self.views]


@dataclass
class AnchorSet:
    """m anchor points in the concatenated feature space, split per view."""

    centers: np.ndarray
    per_view_centers: list = field(default_factory=list)

    @property
    def m(self):
        return self.centers.shape[0]


def check_bipartite(w, k=None, atol=1e-9):
    """Assert the bipartite-graph invariants on a weight matrix.

    Entries nonnegative, rows sum to 1 within ``atol``, and (when ``k``
    is given) at most k nonzeros per row.  Raises ValueError otherwise.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {w.shape}")
    if np.any(w < -atol):
        raise ValueError(f"negative weight {w.min():.3e}")
    rs = w.sum(axis=1)
    worst = float(np.max(np.abs(rs - 1.0)))
    if worst > atol:
        raise ValueError(f"row sums deviate from 1 by up to {worst:.3e}")
    if k is not None:
        nnz = int(np.max(np.count_nonzero(w, axis=1)))
        if nnz > k:
            raise ValueError(f"a row has {nnz} nonzeros, limit is {k}")
    return w


def select_anchors(data: ViewDataset, m, seed=0):
    """Pick m anchors by seeded k-means++ on the concatenated views.

    Features are z-scored per column before clustering and the centroids
    are mapped back to the original feature space, so anchors are directly
    comparable to the raw per-view features.  Deterministic for a fixed
    seed.
    """
    n = data.n
    if not 1 <= m <= n:
        raise ValueError(f"anchor count m={m} must lie in [1, n={n}]")
    for i, v in enumerate(data.views):
        if np.all(v.std(axis=0) < 1e-12):
            warnings.warn(f"view {i} has zero variance in every column")

    concat = np.hstack(data.views)
    mean = concat.mean(axis=0)
    std = concat.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    km = KMeans(n_clusters=m, init="k-means++", n_init=1, random_state=seed)
    km.fit((concat - mean) / std)
    centers = km.cluster_centers_ * std + mean

    blocks = []
    offset = 0
    for d in data.dims:
        blocks.append(centers[:, offset : offset + d].copy())
        offset += d
    return AnchorSet(centers=centers, per_view_centers=blocks)


def build_bipartite(view, anchors, k):
    """Sample-to-anchor graph with adaptive-neighbor closed-form weights.

    For each sample, with squared Euclidean anchor distances sorted
    ascending d_1 <= ... <= d_m, the weight on the j-th nearest anchor
    (j <= k) is

        (d_{k+1} - d_j) / (k*d_{k+1} - sum_{h<=k} d_h)

    and 0 elsewhere; rows sum to 1 by construction.  Ties at the
    (k+1)-th neighbor break by anchor index.  A sample equidistant to its
    k+1 nearest anchors (vanishing denominator) falls back to uniform 1/k
    weights with a warning.
    """
    view = np.asarray(view, dtype=float)
    anchors = np.asarray(anchors, dtype=float)
    n = view.shape[0]
    m = anchors.shape[0]
    if view.shape[1] != anchors.shape[1]:
        raise ValueError(
            f"feature dims disagree: view has {view.shape[1]}, anchors {anchors.shape[1]}"
        )
    if not 1 <= k < m:
        raise ValueError(f"need 1 <= k < m, got k={k}, m={m}")

    d2 = cdist(view, anchors, "sqeuclidean")
    order = np.argsort(d2, axis=1, kind="stable")
    sorted_d = np.take_along_axis(d2, order, axis=1)
    dk1 = sorted_d[:, k]
    num = dk1[:, None] - sorted_d[:, :k]
    den = k * dk1 - sorted_d[:, :k].sum(axis=1)

    degenerate = den < 1e-12
    if np.any(degenerate):
        warnings.warn(
            f"{int(degenerate.sum())} sample(s) equidistant to their {k + 1} "
            "nearest anchors; using uniform weights for those rows"
        )
    vals = np.where(
        degenerate[:, None], 1.0 / k, num / np.where(degenerate, 1.0, den)[:, None]
    )
    w = np.zeros((n, m))
    np.put_along_axis(w, order[:, :k], vals, axis=1)
    return w


def build_all_views(data: ViewDataset, anchors: AnchorSet, k):
    """Build one bipartite graph per view against its anchor block."""
    if len(anchors.per_view_centers) != data.n_views:
        raise ValueError(
            f"anchor set has {len(anchors.per_view_centers)} view blocks, "
            f"dataset has {data.n_views} views"
        )
    return [
        build_bipartite(v, a, k) for v, a in zip(data.views, anchors.per_view_centers)
    ]
