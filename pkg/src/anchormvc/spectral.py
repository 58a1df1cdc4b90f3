"""Bipartite-graph spectral utilities and connected-component labeling.

The fused graph is the view-weighted average of the learned per-view
graphs; its connected components are the final clusters, read off with
union-find.  The zero-eigenvalue multiplicity of the bipartite normalized
Laplacian, which equals the component count, is available both as a dense
eigendecomposition (test oracle, size-capped) and through an equivalent
SVD of the degree-normalized (n, m) graph that keeps the production path
linear in n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse import csgraph

__all__ = [
    "FusedGraph",
    "ComponentLabeling",
    "SizeLimitError",
    "fuse",
    "components",
    "component_count",
    "zero_eig_multiplicity",
    "zero_eig_multiplicity_svd",
    "force_k_components",
]

DEGREE_FLOOR = 1e-10


class SizeLimitError(ValueError):
    """Dense eigendecomposition requested above the configured size cap."""


@dataclass
class FusedGraph:
    """Fused (n, m) sample-to-anchor weights plus the sparsify threshold."""

    weights: np.ndarray
    threshold: float = 1e-6


@dataclass
class ComponentLabeling:
    """Connected-component labels for samples and anchors, z components."""

    sample_labels: np.ndarray
    anchor_labels: np.ndarray
    z: int


def fuse(graphs, xi, threshold=1e-6):
    """Weighted average C = (sum_v C_v / xi_v) / (sum_v 1 / xi_v).

    A convex combination of row-stochastic matrices, so rows still sum
    to 1.  Smaller xi means a larger weight on that view.
    """
    xi = np.asarray(xi, dtype=float).ravel()
    if len(graphs) != xi.shape[0]:
        raise ValueError(f"{len(graphs)} graphs but {xi.shape[0]} weights")
    if np.any(xi <= 0):
        raise ValueError("view weights must be positive")
    inv = 1.0 / xi
    acc = np.zeros_like(np.asarray(graphs[0], dtype=float))
    for g, w in zip(graphs, inv):
        acc += w * np.asarray(g, dtype=float)
    return FusedGraph(weights=acc / inv.sum(), threshold=threshold)


class _UnionFind:
    def __init__(self, size):
        self.parent = list(range(size))
        self.rank = [0] * size
        self.count = size

    def find(self, a):
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.count -= 1
        return True


def _labeling_from_edges(n, m, rows, cols):
    uf = _UnionFind(n + m)
    for i, j in zip(rows, cols):
        uf.union(int(i), n + int(j))
    labels = np.empty(n + m, dtype=int)
    remap = {}
    for node in range(n + m):
        root = uf.find(node)
        if root not in remap:
            remap[root] = len(remap)
        labels[node] = remap[root]
    return ComponentLabeling(
        sample_labels=labels[:n], anchor_labels=labels[n:], z=len(remap)
    )


def components(g: FusedGraph):
    """Connected components of the thresholded bipartite graph.

    Entries below ``g.threshold`` are zeroed first; a sample i and anchor
    j are joined iff the surviving weight is positive.  Isolated nodes
    become singleton components.  Labels are contiguous from 0, ordered
    by first appearance (samples first, then anchors).
    """
    w = np.asarray(g.weights, dtype=float)
    n, m = w.shape
    surviving = w >= g.threshold if g.threshold > 0 else w > 0
    surviving &= w > 0
    rows, cols = np.nonzero(surviving)
    return _labeling_from_edges(n, m, rows, cols)


def component_count(weights, threshold=1e-6):
    """Component count only, via scipy's sparse graph machinery.

    Same count as ``components`` on the same threshold; used on hot paths
    (the solver probes connectivity every iteration) where the full
    labeling is not needed.
    """
    w = np.asarray(weights, dtype=float)
    n, m = w.shape
    mask = w >= threshold if threshold > 0 else w > 0
    mask &= w > 0
    rows, cols = np.nonzero(mask)
    adj = coo_matrix(
        (np.ones(rows.shape[0]), (rows, cols + n)), shape=(n + m, n + m)
    )
    count, _ = csgraph.connected_components(adj, directed=False)
    return int(count)


def _degrees(c):
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("graph weights must be nonnegative")
    return c.sum(axis=1), c.sum(axis=0)


def zero_eig_multiplicity(c, tol=1e-8, dense_cap=2000):
    """Zero-eigenvalue count of the bipartite normalized Laplacian (dense).

    Assembles F = [[0, C], [C^T, 0]], floors the degrees at 1e-10, and
    counts eigenvalues of I - D^{-1/2} F D^{-1/2} below ``tol``.  Nodes
    with no mass at all (zero row or column of C) are counted as one
    component each, matching ``components``.  Intended as an oracle and
    desk-scale probe; raises SizeLimitError when n + m exceeds
    ``dense_cap``.
    """
    c = np.asarray(c, dtype=float)
    n, m = c.shape
    if n + m > dense_cap:
        raise SizeLimitError(f"n + m = {n + m} exceeds the dense cap {dense_cap}")
    d_u, d_m = _degrees(c)
    deg = np.concatenate([d_u, d_m])
    isolated = int(np.sum(deg <= DEGREE_FLOOR))
    dinv = 1.0 / np.sqrt(np.maximum(deg, DEGREE_FLOOR))
    f = np.zeros((n + m, n + m))
    f[:n, n:] = c
    f[n:, :n] = c.T
    lap = np.eye(n + m) - dinv[:, None] * f * dinv[None, :]
    evals = np.linalg.eigvalsh((lap + lap.T) / 2.0)
    return int(np.sum(evals < tol)) + isolated


def zero_eig_multiplicity_svd(c, tol=1e-8):
    """Same count as ``zero_eig_multiplicity`` via an (n, m) SVD.

    The Laplacian spectrum is {1 - s_i} U {1 + s_i} U {1} for the singular
    values s_i of D_U^{-1/2} C D_M^{-1/2}, so zero eigenvalues correspond
    to singular values within ``tol`` of 1.  Costs O(n m^2): safe on the
    production path for any n.
    """
    c = np.asarray(c, dtype=float)
    d_u, d_m = _degrees(c)
    isolated = int(np.sum(d_u <= DEGREE_FLOOR) + np.sum(d_m <= DEGREE_FLOOR))
    norm = (
        c
        * (1.0 / np.sqrt(np.maximum(d_u, DEGREE_FLOOR)))[:, None]
        * (1.0 / np.sqrt(np.maximum(d_m, DEGREE_FLOOR)))[None, :]
    )
    s = np.linalg.svd(norm, compute_uv=False)
    return int(np.sum(s > 1.0 - tol)) + isolated


def force_k_components(g: FusedGraph, k):
    """Component labeling adjusted to exactly k components.

    If the thresholded graph already has k components this is identical
    to ``components``.  With fewer, the globally weakest surviving edges
    are removed (ties broken by (row, col) index) until the count reaches
    k; removing one edge adds at most one component, so the count lands
    exactly on k.  With more, components joined by the largest pruned
    edge are merged, and any remaining surplus (no pruned edges left) is
    merged in index order.
    """
    if k < 1:
        raise ValueError(f"component target must be >= 1, got {k}")
    base = components(g)
    if base.z == k:
        return base

    w = np.asarray(g.weights, dtype=float)
    n, m = w.shape
    surviving = w >= g.threshold if g.threshold > 0 else w > 0
    surviving &= w > 0

    if base.z < k:
        rows, cols = np.nonzero(surviving)
        weights = w[rows, cols]
        order = np.lexsort((cols, rows, weights))
        rows, cols = rows[order], cols[order]

        def count_after_removing(t):
            return _labeling_from_edges(n, m, rows[t:], cols[t:]).z

        lo, hi = 0, len(rows)  # count_after_removing is nondecreasing in t
        while lo < hi:
            mid = (lo + hi) // 2
            if count_after_removing(mid) >= k:
                hi = mid
            else:
                lo = mid + 1
        return _labeling_from_edges(n, m, rows[lo:], cols[lo:])

    # base.z > k: merge across the strongest pruned edges first.
    uf = _UnionFind(n + m)
    rows, cols = np.nonzero(surviving)
    for i, j in zip(rows, cols):
        uf.union(int(i), n + int(j))
    pruned = (~surviving) & (w > 0)
    prows, pcols = np.nonzero(pruned)
    pw = w[prows, pcols]
    order = np.lexsort((pcols, prows, -pw))
    for idx in order:
        if uf.count <= k:
            break
        uf.union(int(prows[idx]), n + int(pcols[idx]))
    node = 1
    while uf.count > k and node < n + m:
        uf.union(0, node)
        node += 1

    labels = np.empty(n + m, dtype=int)
    remap = {}
    for nd in range(n + m):
        root = uf.find(nd)
        if root not in remap:
            remap[root] = len(remap)
        labels[nd] = remap[root]
    return ComponentLabeling(
        sample_labels=labels[:n], anchor_labels=labels[n:], z=len(remap)
    )
