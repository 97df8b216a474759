"""Command-line interface: estimation, benchmarks, and clustering.

Every output embeds the tool version, the fully resolved configuration, the
seed, and the bandwidth(s) actually used; re-running a command with the same
configuration reproduces all values exactly (wall times exempt).  The exit
status is non-zero iff any requested computation failed.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import __version__
from .bench import BenchConfig, run_dimension_test, run_power_test, run_timing
from .cluster import ClusterLossConfig, OptimizerConfig, acc, fit_assignments, harden, nmi
from .errors import GCSDError, ParseError
from .estimators import DivergenceReport, MultiSample, csd_pair, gcsd, kld_pair, mean_pairwise, mmd_pair
from .io import groups_from_ids, multisample_ids, read_samples, write_report, write_samples
from .kernel import KernelConfig, SampleSet, median_heuristic_bandwidth, silverman_bandwidth
from .synth import dimension_suite, power_suite

METRIC_CHOICES = ("gcsd", "pcsd", "pmmd", "pkld")

BENCH_HEADER = [
    "suite_param",
    "metric",
    "value",
    "normalized_value",
    "wall_time_s",
    "failed_flag",
    "runs",
    "seed",
]


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str, default=None, help="output file (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--sigma", type=float, default=None, help="fixed kernel bandwidth")
    p.add_argument("--bandwidth-rule", choices=("median", "silverman"), default="median")
    p.add_argument(
        "--unnormalized-kernel",
        action="store_true",
        help="drop the (sqrt(2 pi) sigma)^(-d) kernel constant",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcsd", description=__doc__)
    parser.add_argument("--version", action="version", version=f"gcsd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="divergence metrics on a grouped sample file")
    p.add_argument("--input", required=True)
    p.add_argument("--metric", action="append", default=None, help="repeatable; comma lists allowed")
    _add_common(p)

    p = sub.add_parser("power", help="scatter-range power test")
    p.add_argument("--r-values", type=str, default="4,8,12,16,20")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--runs", type=int, default=10)
    _add_common(p)

    p = sub.add_parser("dim", help="dimension robustness test")
    p.add_argument("--d-values", type=str, default="10,100,1000")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--r", type=float, default=20.0)
    _add_common(p)

    p = sub.add_parser("time", help="per-metric runtime comparison")
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--r", type=float, default=20.0)
    _add_common(p)

    p = sub.add_parser("cluster", help="assignment-matrix clustering of a sample file")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True, help="number of clusters")
    p.add_argument("--lambda2", type=float, default=0.5)
    p.add_argument("--lambda3", type=float, default=0.5)
    p.add_argument("--learning-rate", type=float, default=0.05)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--restarts", type=int, default=5)
    _add_common(p)

    p = sub.add_parser("export", help="write a synthetic suite as a sample file")
    p.add_argument("--suite", choices=("power", "dim"), default="power")
    p.add_argument("--r", type=float, default=20.0)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def _meta(args, **extra) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    return {"tool": "gcsd", "version": __version__, "config": cfg, "seed": getattr(args, "seed", 0), **extra}


def _bandwidth(args, pooled: SampleSet) -> float:
    if args.sigma is not None:
        return args.sigma
    if args.bandwidth_rule == "silverman":
        return silverman_bandwidth(pooled)
    return median_heuristic_bandwidth(pooled)


def _bench_cfg(args, **kw) -> BenchConfig:
    rule = "fixed" if args.sigma is not None else args.bandwidth_rule
    return BenchConfig(
        seed=args.seed,
        bandwidth_rule=rule,
        sigma=args.sigma,
        normalized=not args.unnormalized_kernel,
        **kw,
    )


def _emit(args, meta, header, rows) -> None:
    text = write_report(args.out, args.format, meta, header, rows)
    if args.out is None:
        sys.stdout.write(text)
    else:
        print(f"wrote {args.out}")


def cmd_estimate(args) -> int:
    metrics = []
    for spec in args.metric or ["gcsd"]:
        metrics.extend(m.strip() for m in spec.split(",") if m.strip())
    for m in metrics:
        if m not in METRIC_CHOICES:
            print(f"error: unknown metric {m!r}", file=sys.stderr)
            return 2
    ids, features = read_samples(args.input)
    if ids is None:
        print("error: estimate requires a group column", file=sys.stderr)
        return 2
    ms = groups_from_ids(ids, features)
    pooled = SampleSet(features)
    bw = _bandwidth(args, pooled)
    kc = KernelConfig(bandwidth=bw, dim=ms.dim, normalized=not args.unnormalized_kernel)

    pair_ops = {"pcsd": csd_pair, "pmmd": mmd_pair, "pkld": kld_pair}
    reports: list[DivergenceReport] = []
    for name in metrics:
        start = time.perf_counter()
        failed, note, value = False, "", float("nan")
        try:
            value = gcsd(ms, kc) if name == "gcsd" else mean_pairwise(pair_ops[name], ms, kc)
            if not np.isfinite(value):
                failed, note = True, "non-finite value"
        except GCSDError as exc:
            failed, note = True, str(exc)
        reports.append(
            DivergenceReport(
                metric=name,
                value=value,
                m=ms.m,
                n_list=ms.sizes,
                dim=ms.dim,
                bandwidth=bw,
                wall_time=time.perf_counter() - start,
                seed=args.seed,
                failed=failed,
                note=note,
            )
        )

    header = ["metric", "value", "m", "n_list", "d", "bandwidth", "wall_time_s", "failed_flag", "seed"]
    rows = [
        [r.metric, r.value, r.m, ";".join(map(str, r.n_list)), r.dim, r.bandwidth, r.wall_time, r.failed, r.seed]
        for r in reports
    ]
    _emit(args, _meta(args, bandwidth=bw), header, rows)
    return 1 if any(r.failed for r in reports) else 0


def _bench_rows(results, runs_field):
    rows = []
    for res in results:
        for metric in sorted(res.values):
            rows.append(
                [
                    res.param,
                    metric,
                    res.values[metric],
                    res.normalized.get(metric, float("nan")),
                    res.wall_times[metric],
                    res.failed[metric],
                    runs_field(res),
                    res.seed,
                ]
            )
    return rows


def cmd_power(args) -> int:
    results = run_power_test(
        r_values=_parse_floats(args.r_values),
        n_per_dist=args.n,
        runs=args.runs,
        cfg=_bench_cfg(args),
    )
    meta = _meta(args, bandwidths={str(r.param): r.bandwidth for r in results})
    _emit(args, meta, BENCH_HEADER, _bench_rows(results, lambda r: r.monte_carlo_runs))
    return 1 if any(any(r.failed.values()) for r in results) else 0


def cmd_dim(args) -> int:
    results = run_dimension_test(
        d_values=_parse_ints(args.d_values),
        n_per_dist=args.n,
        cfg=_bench_cfg(args, r=args.r),
    )
    meta = _meta(args, bandwidths={str(r.param): r.bandwidth for r in results})
    _emit(args, meta, BENCH_HEADER, _bench_rows(results, lambda r: r.monte_carlo_runs))
    return 1 if any(any(r.failed.values()) for r in results) else 0


def cmd_time(args) -> int:
    res = run_timing(m=args.m, n=args.n, d=args.d, runs=args.runs, cfg=_bench_cfg(args, r=args.r))
    rows = []
    for metric in sorted(res.medians):
        ratio = 1.0 if metric == "gcsd" else res.ratios[metric]
        rows.append([res.n, metric, res.medians[metric], ratio, res.medians[metric], False, res.runs, res.seed])
    for metric, ratio in sorted(res.ratios.items()):
        print(f"time({metric}) / time(gcsd) = {ratio:.3f}")
    _emit(args, _meta(args, bandwidth=res.bandwidth, m=res.m, d=res.d), BENCH_HEADER, rows)
    return 0


def cmd_cluster(args) -> int:
    ids, features = read_samples(args.input)
    if args.m > features.shape[0]:
        print("error: more clusters than samples", file=sys.stderr)
        return 2
    pooled = SampleSet(features)
    bw = _bandwidth(args, pooled)
    kc = KernelConfig(bandwidth=bw, dim=pooled.dim, normalized=not args.unnormalized_kernel)
    loss_cfg = ClusterLossConfig(lambda2=args.lambda2, lambda3=args.lambda3, kernel=kc)
    opt_cfg = OptimizerConfig(
        learning_rate=args.learning_rate,
        max_iters=args.max_iters,
        tolerance=args.tolerance,
        seed=args.seed,
        restarts=args.restarts,
    )
    fit = fit_assignments(pooled, args.m, loss_cfg, opt_cfg)
    labels = harden(fit.assignments)

    metrics = {}
    if ids is not None:
        metrics = {"acc": acc(labels, ids), "nmi": nmi(labels, ids)}
        print(f"acc={metrics['acc']:.4f} nmi={metrics['nmi']:.4f}")
    meta = _meta(
        args,
        bandwidth=bw,
        simplex_sign=fit.simplex_sign,
        converged=fit.converged,
        final_loss=fit.final_loss,
        best_restart=fit.best_restart,
        iterations=len(fit.trace) - 1,
        metrics=metrics,
        loss_trace=fit.trace,
    )
    header = ["index", "label"] + (["true_label"] if ids is not None else [])
    rows = [[i, int(lab)] + ([int(ids[i])] if ids is not None else []) for i, lab in enumerate(labels)]
    _emit(args, meta, header, rows)
    return 0 if fit.converged else 1


def cmd_export(args) -> int:
    if args.suite == "power":
        ms = power_suite([args.r], args.n, args.seed)[0]
        ids, features = multisample_ids(ms, list(range(1, 11)))
    else:
        ms = dimension_suite([args.d], args.r, args.n, args.seed)[0]
        ids, features = multisample_ids(ms, [1, 2, 4])
    write_samples(args.out, ids, features)
    print(f"wrote {args.out}")
    return 0


HANDLERS = {
    "estimate": cmd_estimate,
    "power": cmd_power,
    "dim": cmd_dim,
    "time": cmd_time,
    "cluster": cmd_cluster,
    "export": cmd_export,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GCSDError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
