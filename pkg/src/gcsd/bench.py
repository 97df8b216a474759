"""Power, dimension, and runtime benchmark harness.

Each cell draws a shared synthetic suite, then every metric is evaluated
independently on the same data (no kernel sharing between metrics, so wall
times reflect what each metric actually costs).  Failures are recorded per
cell and never abort a suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InputError
from .estimators import MultiSample, csd_pair, gcsd, kld_pair, mean_pairwise, mmd_pair
from .kernel import KernelConfig, SampleSet, median_heuristic_bandwidth, silverman_bandwidth
from .synth import sample_distribution, sample_distribution_md

METRICS = ("gcsd", "pcsd", "pmmd", "pkld")

DEFAULT_R_VALUES = (4.0, 8.0, 12.0, 16.0, 20.0)
DEFAULT_D_VALUES = (10, 100, 1000)

_SEED_MASK = 2**63 - 1


@dataclass(frozen=True)
class BenchConfig:
    seed: int = 0
    bandwidth_rule: str = "median"  # median | silverman | fixed
    sigma: float | None = None
    normalized: bool = True
    r: float = 20.0  # scatter range for dimension and timing suites
    size_cap: int = 20000  # n * m guard for the timing harness

    def __post_init__(self):
        if self.bandwidth_rule not in ("median", "silverman", "fixed"):
            raise ConfigError(f"unknown bandwidth rule {self.bandwidth_rule!r}")
        if self.bandwidth_rule == "fixed" and not (self.sigma and self.sigma > 0):
            raise ConfigError("fixed bandwidth rule needs a positive sigma")


@dataclass
class BenchResult:
    """One suite cell: raw and normalized metric values plus bookkeeping."""

    param: float
    values: dict[str, float]
    normalized: dict[str, float]
    wall_times: dict[str, float]
    failed: dict[str, bool]
    notes: dict[str, str]
    monte_carlo_runs: int
    seed: int
    bandwidth: float


def _derived_seed(seed: int, *keys: int) -> int:
    ss = np.random.SeedSequence([seed & _SEED_MASK, *[k & _SEED_MASK for k in keys]])
    return int(ss.generate_state(1, np.uint64)[0] & _SEED_MASK)


def _bandwidth_for(ms: MultiSample, cfg: BenchConfig) -> float:
    if cfg.bandwidth_rule == "fixed":
        return float(cfg.sigma)
    pooled = SampleSet(np.vstack([g.data for g in ms.groups]))
    if cfg.bandwidth_rule == "median":
        return median_heuristic_bandwidth(pooled)
    return silverman_bandwidth(pooled)


def _evaluate_metric(name: str, ms: MultiSample, kc: KernelConfig) -> tuple[float, str]:
    if name == "gcsd":
        return gcsd(ms, kc), ""
    if name == "pcsd":
        return mean_pairwise(csd_pair, ms, kc), ""
    if name == "pmmd":
        return mean_pairwise(mmd_pair, ms, kc), ""
    if name == "pkld":
        stats: dict = {}
        value = mean_pairwise(lambda a, b, c: kld_pair(a, b, c, stats=stats), ms, kc)
        note = ""
        if stats.get("floored", 0) > 0:
            frac = stats["floored"] / stats["evals"]
            note = f"density floor hit on {frac:.1%} of evaluations"
        return value, note
    raise ConfigError(f"unknown metric {name!r}")


def _timed_cell(ms: MultiSample, kc: KernelConfig, metrics=METRICS):
    """Evaluate every metric on one suite; capture failures per metric."""
    values, times, failed, notes = {}, {}, {}, {}
    for name in metrics:
        start = time.perf_counter()
        try:
            value, note = _evaluate_metric(name, ms, kc)
        except Exception as exc:  # record, never abort the suite
            value, note = math.nan, f"{type(exc).__name__}: {exc}"
        times[name] = time.perf_counter() - start
        is_bad = not math.isfinite(value)
        saturated = "floor hit on 100" in note
        values[name] = value
        failed[name] = is_bad or saturated
        notes[name] = note
    return values, times, failed, notes


def _normalize_series(results: list[BenchResult], metrics=METRICS):
    for name in metrics:
        finite = [r.values[name] for r in results if math.isfinite(r.values[name])]
        if not finite:
            continue
        low = min(finite)
        if low <= 0:
            continue  # normalization-by-minimum only makes sense for positive series
        for r in results:
            if math.isfinite(r.values[name]):
                r.normalized[name] = r.values[name] / low


def run_power_test(
    r_values=DEFAULT_R_VALUES,
    n_per_dist: int = 1000,
    runs: int = 10,
    cfg: BenchConfig = BenchConfig(),
) -> list[BenchResult]:
    """Monte Carlo averaged metric values over increasing scatter ranges,
    normalized per metric by the series minimum."""
    if runs < 1:
        raise InputError("need runs >= 1")
    results = []
    for r in r_values:
        acc_vals = {m: [] for m in METRICS}
        acc_time = {m: 0.0 for m in METRICS}
        any_failed = {m: False for m in METRICS}
        notes = {m: "" for m in METRICS}
        bandwidths = []
        for run in range(runs):
            run_seed = _derived_seed(cfg.seed, run)
            ms = MultiSample(
                tuple(sample_distribution(i, r, n_per_dist, run_seed) for i in range(1, 11))
            )
            bw = _bandwidth_for(ms, cfg)
            bandwidths.append(bw)
            kc = KernelConfig(bandwidth=bw, dim=1, normalized=cfg.normalized)
            values, times, failed, run_notes = _timed_cell(ms, kc)
            for m in METRICS:
                if not failed[m]:
                    acc_vals[m].append(values[m])
                else:
                    any_failed[m] = True
                if run_notes[m] and not notes[m]:
                    notes[m] = run_notes[m]
                acc_time[m] += times[m]
        results.append(
            BenchResult(
                param=float(r),
                values={m: (float(np.mean(acc_vals[m])) if acc_vals[m] else math.nan) for m in METRICS},
                normalized={},
                wall_times={m: acc_time[m] / runs for m in METRICS},
                failed={m: any_failed[m] or not acc_vals[m] for m in METRICS},
                notes=notes,
                monte_carlo_runs=runs,
                seed=cfg.seed,
                bandwidth=float(np.mean(bandwidths)),
            )
        )
    _normalize_series(results)
    return results


def run_dimension_test(
    d_values=DEFAULT_D_VALUES,
    n_per_dist: int = 500,
    cfg: BenchConfig = BenchConfig(),
) -> list[BenchResult]:
    """Metric behavior on the {Gaussian, shifted Gaussian, central uniform}
    product-law suite as the dimension grows; failures are flags, not errors."""
    if any(d < 1 or d > 10**4 for d in d_values):
        raise InputError("d_values must lie in [1, 10^4]")
    results = []
    for d in d_values:
        groups = tuple(
            sample_distribution_md(i, cfg.r, n_per_dist, d, cfg.seed) for i in (1, 2, 4)
        )
        ms = MultiSample(groups)
        bw = _bandwidth_for(ms, cfg)
        kc = KernelConfig(bandwidth=bw, dim=d, normalized=cfg.normalized)
        values, times, failed, notes = _timed_cell(ms, kc)
        results.append(
            BenchResult(
                param=float(d),
                values=values,
                normalized={},
                wall_times=times,
                failed=failed,
                notes=notes,
                monte_carlo_runs=1,
                seed=cfg.seed,
                bandwidth=bw,
            )
        )
    return results


@dataclass
class TimingResult:
    """Median per-metric wall times on one shared suite, plus ratios to GCSD."""

    m: int
    n: int
    d: int
    runs: int
    seed: int
    bandwidth: float
    medians: dict[str, float]
    ratios: dict[str, float] = field(default_factory=dict)


def run_timing(
    m: int = 10,
    n: int = 1000,
    d: int = 1,
    runs: int = 5,
    cfg: BenchConfig = BenchConfig(),
) -> TimingResult:
    """Median-of-runs wall time per metric; a warm-up evaluation is discarded."""
    if m < 2 or n < 1 or d < 1 or runs < 1:
        raise InputError("m >= 2, n >= 1, d >= 1, runs >= 1 required")
    if n * m > cfg.size_cap:
        raise InputError(f"n*m = {n * m} exceeds the size cap {cfg.size_cap}")
    groups = tuple(
        sample_distribution_md((g % 10) + 1, cfg.r, n, d, _derived_seed(cfg.seed, 1000 + g))
        for g in range(m)
    )
    ms = MultiSample(groups)
    bw = _bandwidth_for(ms, cfg)
    kc = KernelConfig(bandwidth=bw, dim=d, normalized=cfg.normalized)

    medians = {}
    for name in METRICS:
        _evaluate_metric(name, ms, kc)  # warm-up, discarded
        samples = []
        for _ in range(runs):
            start = time.perf_counter()
            _evaluate_metric(name, ms, kc)
            samples.append(time.perf_counter() - start)
        medians[name] = float(np.median(samples))
    ratios = {name: medians[name] / medians["gcsd"] for name in METRICS if name != "gcsd"}
    return TimingResult(m=m, n=n, d=d, runs=runs, seed=cfg.seed, bandwidth=bw, medians=medians, ratios=ratios)
