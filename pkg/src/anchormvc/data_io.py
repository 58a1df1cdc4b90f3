"""Dataset ingestion, synthetic benchmark generation, and result persistence.

File formats (all plain text, diffable):

- manifest: JSON object with keys ``name``, ``views`` (list of paths,
  relative to the manifest), ``labels`` (path or null), ``delimiter``,
  ``has_header``.
- view file: delimited text, one sample per row, 17 significant digits
  (doubles round-trip exactly).
- labels: one integer per line.
- fused graph export: lines of ``row col weight``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .anchor_graph import ViewDataset
from .metrics import COLUMNS, MetricReport
from .spectral import FusedGraph

__all__ = [
    "ParseError",
    "ShapeMismatch",
    "LabelMismatch",
    "DatasetManifest",
    "SynthSpec",
    "ClusteringResult",
    "read_manifest",
    "write_manifest",
    "load_dataset",
    "save_dataset",
    "load_labels",
    "generate_synthetic",
    "save_results",
]

FLOAT_FMT = "%.17g"


class ParseError(ValueError):
    """A data file failed to parse; message carries file, line and column."""


class ShapeMismatch(ValueError):
    """Views disagree on the sample count."""


class LabelMismatch(ValueError):
    """Label file length differs from the sample count."""


@dataclass
class DatasetManifest:
    name: str
    view_files: list
    label_file: str | None = None
    delimiter: str = ","
    has_header: bool = False

    def __post_init__(self):
        if len(self.view_files) < 1:
            raise ValueError("manifest must list at least one view file")


def read_manifest(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    with open(path) as f:
        raw = json.load(f)
    base = path.parent
    views = [str(base / v) for v in raw["views"]]
    labels = raw.get("labels")
    return DatasetManifest(
        name=raw.get("name", path.stem),
        view_files=views,
        label_file=str(base / labels) if labels else None,
        delimiter=raw.get("delimiter", ","),
        has_header=bool(raw.get("has_header", False)),
    )


def write_manifest(manifest: DatasetManifest, path):
    path = Path(path)
    base = path.parent
    payload = {
        "name": manifest.name,
        "views": [str(Path(v).relative_to(base)) for v in manifest.view_files],
        "labels": (
            str(Path(manifest.label_file).relative_to(base))
            if manifest.label_file
            else None
        ),
        "delimiter": manifest.delimiter,
        "has_header": manifest.has_header,
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    return path


def _parse_matrix(path, delimiter, has_header):
    rows = []
    width = None
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if lineno == 1 and has_header:
                continue
            line = line.strip()
            if not line:
                continue
            parts = line.split(delimiter)
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ParseError(
                    f"{path}:{lineno}: expected {width} columns, found {len(parts)}"
                )
            row = []
            for col, token in enumerate(parts, start=1):
                try:
                    row.append(float(token))
                except ValueError:
                    raise ParseError(
                        f"{path}:{lineno}:{col}: not a number: {token!r}"
                    ) from None
            rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def load_labels(path):
    """One integer per line."""
    labels = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}:1: not an integer label: {line!r}"
                ) from None
    return np.asarray(labels, dtype=int)


def load_dataset(manifest: DatasetManifest):
    """Read all view files (and labels) into a ViewDataset; no normalization."""
    views = []
    counts = []
    for vf in manifest.view_files:
        if not Path(vf).exists():
            raise FileNotFoundError(f"view file not found: {vf}")
        mat = _parse_matrix(vf, manifest.delimiter, manifest.has_header)
        views.append(mat)
        counts.append(mat.shape[0])
    if len(set(counts)) != 1:
        raise ShapeMismatch(f"views have differing sample counts: {counts}")
    labels = None
    if manifest.label_file:
        if not Path(manifest.label_file).exists():
            raise FileNotFoundError(f"label file not found: {manifest.label_file}")
        labels = load_labels(manifest.label_file)
        if labels.shape[0] != counts[0]:
            raise LabelMismatch(
                f"label count {labels.shape[0]} != sample count {counts[0]}"
            )
    return ViewDataset(views=views, labels=labels)


def save_dataset(data: ViewDataset, out_dir, name="dataset", delimiter=","):
    """Write views, labels and a manifest under out_dir; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    view_files = []
    for v, mat in enumerate(data.views):
        vf = out / f"{name}_view{v}.csv"
        np.savetxt(vf, mat, fmt=FLOAT_FMT, delimiter=delimiter)
        view_files.append(str(vf))
    label_file = None
    if data.labels is not None:
        label_file = str(out / f"{name}_labels.txt")
        np.savetxt(label_file, data.labels, fmt="%d")
    manifest = DatasetManifest(
        name=name, view_files=view_files, label_file=label_file, delimiter=delimiter
    )
    return write_manifest(manifest, out / f"{name}.json")


@dataclass
class SynthSpec:
    """Multi-view Gaussian-blob benchmark with per-view corruption."""

    n: int = 300
    n_views: int = 3
    K: int = 3
    dims: tuple = (8, 6, 10)
    separation: float = 10.0
    noise: float = 1.0
    view_corruption: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.K < 2 or self.n < self.K:
            raise ValueError(f"need n >= K >= 2, got n={self.n}, K={self.K}")
        if len(self.dims) != self.n_views:
            raise ValueError(
                f"dims has {len(self.dims)} entries for {self.n_views} views"
            )
        if any(d < 1 for d in self.dims):
            raise ValueError("every view dimension must be >= 1")
        if not 0.0 <= self.view_corruption < 1.0:
            raise ValueError("view_corruption must lie in [0, 1)")
        if self.separation <= 0 or self.noise < 0:
            raise ValueError("separation must be positive and noise nonnegative")


def _view_centers(rng, K, dim, separation):
    # Orthonormal frame scaled so pairwise center distance is exactly the
    # separation; falls back to a separation-spaced line when dim < K.
    if dim >= K:
        gauss = rng.standard_normal((dim, dim))
        q, _ = np.linalg.qr(gauss)
        frame = q[:, :K].T * (separation / np.sqrt(2.0))
    else:
        direction = rng.standard_normal(dim)
        direction /= np.linalg.norm(direction)
        frame = np.outer(np.arange(K, dtype=float) * separation, direction)
    return frame + rng.standard_normal(dim) * separation


def generate_synthetic(spec: SynthSpec):
    """Gaussian blobs per view with balanced labels and per-view corruption.

    A corrupted sample keeps its ground-truth label but, in that one view,
    has its features redrawn from a different cluster's distribution.
    Corruption index sets are disjoint slices of a single permutation while
    V * fraction <= 1, so every sample stays clean in a majority of views.
    Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(spec.seed)
    base = np.repeat(np.arange(spec.K), spec.n // spec.K)
    extra = np.arange(spec.n - base.shape[0])
    labels = rng.permutation(np.concatenate([base, extra % spec.K]))

    views = []
    corrupt_order = rng.permutation(spec.n)
    n_corrupt = int(round(spec.view_corruption * spec.n))
    for v in range(spec.n_views):
        centers = _view_centers(rng, spec.K, spec.dims[v], spec.separation)
        feats = centers[labels] + spec.noise * rng.standard_normal(
            (spec.n, spec.dims[v])
        )
        if n_corrupt > 0:
            start = (v * n_corrupt) % spec.n
            picked = np.take(corrupt_order, np.arange(start, start + n_corrupt), mode="wrap")
            for i in picked:
                other = int(rng.integers(spec.K - 1))
                if other >= labels[i]:
                    other += 1
                feats[i] = centers[other] + spec.noise * rng.standard_normal(
                    spec.dims[v]
                )
        views.append(feats)
    return ViewDataset(views=views, labels=labels)


@dataclass
class ClusteringResult:
    """Everything a pipeline run produces: fused graph, labels, diagnostics."""

    fused: FusedGraph
    sample_labels: np.ndarray
    anchor_labels: np.ndarray
    n_components: int
    n_components_unforced: int
    report: MetricReport | None = None
    trace: list = field(default_factory=list)
    converged: bool = True
    report_line: str | None = None


def _metric_lines(result: ClusteringResult):
    header = "# " + "\t".join(COLUMNS)
    if result.report_line is not None:
        return header, result.report_line
    return header, result.report.to_line()


def save_results(result: ClusteringResult, out_dir):
    """Write labels, metric report, iteration trace and fused-graph edges.

    Files: ``labels.txt`` and ``anchor_labels.txt`` (one integer per line),
    ``metrics.txt`` (header comment plus one metric line in the standard
    column order), ``trace.csv``, and ``fused_graph.txt`` (``row col
    weight`` per surviving edge, row-major).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "labels.txt", result.sample_labels, fmt="%d")
    np.savetxt(out / "anchor_labels.txt", result.anchor_labels, fmt="%d")

    if result.report is not None or result.report_line is not None:
        header, line = _metric_lines(result)
        (out / "metrics.txt").write_text(header + "\n" + line + "\n")

    if result.trace:
        n_views = len(result.trace[0].xi)
        cols = ["iteration", "r1", "r2", "beta"]
        cols += [f"xi_{v + 1}" for v in range(n_views)]
        cols.append("objective")
        lines = [",".join(cols)]
        for row in result.trace:
            vals = [str(row.iteration), f"{row.r1:.9e}", f"{row.r2:.9e}", f"{row.beta:.9e}"]
            vals += [f"{x:.9e}" for x in row.xi]
            vals.append(f"{row.objective:.9e}")
            lines.append(",".join(vals))
        (out / "trace.csv").write_text("\n".join(lines) + "\n")

    w = result.fused.weights
    edge_lines = []
    rows, cols_ = np.nonzero(w >= result.fused.threshold)
    for i, j in zip(rows, cols_):
        edge_lines.append(f"{i} {j} {w[i, j]:.17g}")
    (out / "fused_graph.txt").write_text("\n".join(edge_lines) + "\n")
