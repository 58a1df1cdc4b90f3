"""Command-line pipeline: generate, cluster, evaluate, sweep.

Subcommands:

- ``cluster``: load or generate data, build anchor graphs, run the solver,
  label by connected components, report metrics, save results.
- ``sweep``: repeat ``cluster`` over one axis (p, anchors, alpha, beta)
  and print a table of metrics per value.
- ``synth``: generate a synthetic dataset to disk.
- ``eval``: compute metrics between two label files.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 solver did not converge
(results still written).  Phase runtimes (graph build, solve, label) are
logged to stderr.  Inner thread counts follow the usual BLAS variables
(OMP_NUM_THREADS etc.).
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, replace

import numpy as np

from . import data_io, metrics
from .anchor_graph import build_all_views, select_anchors
from .data_io import ClusteringResult, SynthSpec
from .solver import SolverConfig, solve
from .spectral import components, force_k_components, fuse

__all__ = ["RunConfig", "run_clustering", "main"]

log = logging.getLogger("anchormvc")

USAGE_ERROR, DATA_ERROR, NOT_CONVERGED = 1, 2, 3


@dataclass
class RunConfig:
    """One pipeline run: data source, anchor params, solver params, output."""

    manifest: str | None = None
    synth: SynthSpec | None = None
    K: int | None = None
    anchors: int | None = None
    anchor_prop: float = 0.5
    neighbors: int = 5
    alpha: float = 0.1
    beta: float = 1.0
    adaptive_beta: bool = True
    p: float = 0.9
    tol: float = 1e-6
    max_iters: int = 300
    seed: int = 0
    repetitions: int = 1
    out: str | None = None
    threshold: float = 1e-6

    def __post_init__(self):
        if (self.manifest is None) == (self.synth is None):
            raise ValueError("exactly one of manifest or synth must be given")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def _load_data(cfg: RunConfig):
    if cfg.manifest is not None:
        return data_io.load_dataset(data_io.read_manifest(cfg.manifest))
    return data_io.generate_synthetic(cfg.synth)


def _resolve_k(cfg: RunConfig, data):
    if cfg.K is not None:
        return cfg.K
    if cfg.synth is not None:
        return cfg.synth.K
    if data.labels is not None:
        return int(np.unique(data.labels).shape[0])
    raise ValueError("cluster count is required (no labels to infer it from)")


def run_clustering(cfg: RunConfig, seed=None):
    """Full pipeline for one seed; returns a ClusteringResult."""
    seed = cfg.seed if seed is None else seed
    data = _load_data(cfg)
    n = data.n
    m = cfg.anchors if cfg.anchors is not None else max(2, int(round(cfg.anchor_prop * n)))
    m = min(m, n)
    k = max(1, min(cfg.neighbors, m - 1))
    K = _resolve_k(cfg, data)

    t0 = time.perf_counter()
    anchor_set = select_anchors(data, m, seed=seed)
    graphs = build_all_views(data, anchor_set, k)
    t1 = time.perf_counter()
    log.info("graph build: %.3f s (n=%d, m=%d, k=%d)", t1 - t0, n, m, k)

    config = SolverConfig(
        alpha=cfg.alpha,
        beta=cfg.beta,
        p=cfg.p,
        K=K,
        max_iters=cfg.max_iters,
        tol=cfg.tol,
        eta=1.1,
        mu0=1e-5,
        rho0=1e-5,
        beta_adaptive=cfg.adaptive_beta,
        seed=seed,
    )
    state = solve(graphs, config)
    t2 = time.perf_counter()
    log.info("solve: %.3f s (%d iterations, converged=%s)", t2 - t1, state.n_iter, state.converged)

    fused = fuse(state.C, state.xi, threshold=cfg.threshold)
    plain = components(fused)
    labeling = plain if plain.z == K else force_k_components(fused, K)
    t3 = time.perf_counter()
    log.info("label: %.3f s (components=%d, forced=%s)", t3 - t2, plain.z, plain.z != K)

    report = None
    if data.labels is not None:
        report = metrics.evaluate_clustering(data.labels, labeling.sample_labels)
    return ClusteringResult(
        fused=fused,
        sample_labels=labeling.sample_labels,
        anchor_labels=labeling.anchor_labels,
        n_components=labeling.z,
        n_components_unforced=plain.z,
        report=report,
        trace=state.trace,
        converged=state.converged,
    )


def _aggregate_reports(reports):
    vals = np.array([r.values() for r in reports])
    mean, std = vals.mean(axis=0), vals.std(axis=0)
    return "\t".join(f"{m:.4f}±{s:.4f}" for m, s in zip(mean, std))


def cmd_cluster(cfg: RunConfig):
    reports = []
    result = None
    converged = True
    for rep in range(cfg.repetitions):
        res = run_clustering(cfg, seed=cfg.seed + rep)
        converged &= res.converged
        if result is None:
            result = res
        if res.report is not None:
            reports.append(res.report)

    print("# " + "\t".join(metrics.COLUMNS))
    if len(reports) > 1:
        line = _aggregate_reports(reports)
        result.report_line = line
        print(line)
    elif reports:
        print(reports[0].to_line())
    else:
        print("(no ground-truth labels; metrics unavailable)")
    print(f"components: {result.n_components_unforced} (target {result.n_components})")

    if cfg.out:
        data_io.save_results(result, cfg.out)
        log.info("results written to %s", cfg.out)
    return 0 if converged else NOT_CONVERGED


def cmd_sweep(cfg: RunConfig, axis, values):
    rows = []
    code = 0
    for value in values:
        run_cfg = cfg
        if axis == "p":
            run_cfg = replace(cfg, p=float(value))
        elif axis == "alpha":
            run_cfg = replace(cfg, alpha=float(value))
        elif axis == "beta":
            run_cfg = replace(cfg, beta=float(value))
        elif axis == "anchors":
            v = float(value)
            if v <= 1.0:
                run_cfg = replace(cfg, anchors=None, anchor_prop=v)
            else:
                run_cfg = replace(cfg, anchors=int(v))
        else:
            raise ValueError(f"unknown sweep axis {axis!r}")
        t0 = time.perf_counter()
        res = run_clustering(run_cfg)
        elapsed = time.perf_counter() - t0
        code = max(code, 0 if res.converged else NOT_CONVERGED)
        line = res.report.to_line() if res.report else "-"
        rows.append(f"{value}\t{line}\t{elapsed:.3f}")
    print("# value\t" + "\t".join(metrics.COLUMNS) + "\truntime_s")
    for row in rows:
        print(row)
    return code


def cmd_synth(spec: SynthSpec, out_dir, name):
    data = data_io.generate_synthetic(spec)
    manifest = data_io.save_dataset(data, out_dir, name=name)
    print(manifest)
    return 0


def cmd_eval(truth_path, pred_path):
    truth = data_io.load_labels(truth_path)
    pred = data_io.load_labels(pred_path)
    report = metrics.evaluate_clustering(truth, pred)
    print("# " + "\t".join(metrics.COLUMNS))
    print(report.to_line())
    return 0


def parse_synth_spec(text, seed=0):
    """Parse 'n=300,V=3,K=3,dims=8:6:10,separation=10,noise=1,corruption=0.1'."""
    fields = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"bad synth field {part!r} (expected key=value)")
        key, val = part.split("=", 1)
        fields[key.strip().lower()] = val.strip()
    kwargs = {"seed": seed}
    if "n" in fields:
        kwargs["n"] = int(fields["n"])
    if "v" in fields or "views" in fields:
        kwargs["n_views"] = int(fields.get("v", fields.get("views")))
    if "k" in fields or "clusters" in fields:
        kwargs["K"] = int(fields.get("k", fields.get("clusters")))
    if "dims" in fields:
        kwargs["dims"] = tuple(int(x) for x in fields["dims"].split(":"))
    elif "n_views" in kwargs:
        kwargs["dims"] = tuple([8] * kwargs["n_views"])
    if "separation" in fields:
        kwargs["separation"] = float(fields["separation"])
    if "noise" in fields:
        kwargs["noise"] = float(fields["noise"])
    if "corruption" in fields:
        kwargs["view_corruption"] = float(fields["corruption"])
    return SynthSpec(**kwargs)


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 so that 2 can mean data error
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_with(message))

    @staticmethod
    def exit_with(message):
        print(f"error: {message}", file=sys.stderr)
        return USAGE_ERROR


def _add_common(sub):
    sub.add_argument("--manifest", help="path to a dataset manifest (JSON)")
    sub.add_argument("--synth", help="synthetic data spec, e.g. 'n=300,V=3,K=3'")
    sub.add_argument("--clusters", type=int, default=None, help="cluster count K")
    sub.add_argument("--anchors", type=int, default=None, help="absolute anchor count m")
    sub.add_argument("--anchor-prop", type=float, default=0.5, help="anchors as a fraction of n")
    sub.add_argument("--neighbors", type=int, default=5, help="nonzeros per graph row")
    sub.add_argument("--alpha", type=float, default=0.1, help="sparse-error weight")
    sub.add_argument("--beta", type=float, default=1.0, help="spectral weight (initial if adaptive)")
    sub.add_argument("--adaptive-beta", choices=("on", "off"), default="on")
    sub.add_argument("--p", type=float, default=0.9, help="Schatten exponent in (0, 1]")
    sub.add_argument("--tol", type=float, default=1e-6)
    sub.add_argument("--max-iters", type=int, default=300)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--repetitions", type=int, default=1)
    sub.add_argument("--out", default=None, help="directory for result files")


def _build_run_config(args):
    synth = parse_synth_spec(args.synth, seed=args.seed) if args.synth else None
    return RunConfig(
        manifest=args.manifest,
        synth=synth,
        K=args.clusters,
        anchors=args.anchors,
        anchor_prop=args.anchor_prop,
        neighbors=args.neighbors,
        alpha=args.alpha,
        beta=args.beta,
        adaptive_beta=args.adaptive_beta == "on",
        p=args.p,
        tol=args.tol,
        max_iters=args.max_iters,
        seed=args.seed,
        repetitions=args.repetitions,
        out=args.out,
    )


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    parser = _Parser(prog="anchormvc", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    cluster = subs.add_parser("cluster", help="run the full clustering pipeline")
    _add_common(cluster)

    sweep = subs.add_parser("sweep", help="run the pipeline over one parameter axis")
    _add_common(sweep)
    sweep.add_argument("--axis", choices=("p", "anchors", "alpha", "beta"), required=True)
    sweep.add_argument("--values", required=True, help="comma-separated values")

    synth = subs.add_parser("synth", help="generate a synthetic dataset to disk")
    synth.add_argument("--synth", required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.add_argument("--name", default="synthetic")

    ev = subs.add_parser("eval", help="metrics between two label files")
    ev.add_argument("--truth", required=True)
    ev.add_argument("--pred", required=True)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR

    try:
        if args.command == "cluster":
            return cmd_cluster(_build_run_config(args))
        if args.command == "sweep":
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            if not values:
                print("error: --values is empty", file=sys.stderr)
                return USAGE_ERROR
            return cmd_sweep(_build_run_config(args), args.axis, values)
        if args.command == "synth":
            spec = parse_synth_spec(args.synth, seed=args.seed)
            return cmd_synth(spec, args.out, args.name)
        if args.command == "eval":
            return cmd_eval(args.truth, args.pred)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
