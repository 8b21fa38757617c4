"""Seeded replication harnesses shared by the command line and the test suite."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import (
    monte_carlo_angle,
    monte_carlo_distance,
    monte_carlo_sum_of_squares,
    norm_limit_moments,
)
from .errors import ConfigurationError
from .evaluation import DEFAULT_TOLERANCE, EvalReport, tdr_fdr
from .pipeline import DetectionConfig, geomcp_detect
from .simulation import ScenarioSpec, generate, replication_rng

__all__ = [
    "BenchRow",
    "ReplicationResult",
    "ValidationRow",
    "benchmark",
    "run_replications",
    "scaling_slope",
    "validation_grid",
]


@dataclass(frozen=True)
class ReplicationResult:
    rep: int
    truth: tuple[int, ...]
    estimate: tuple[int, ...]
    report: EvalReport


def _one_replication(args) -> ReplicationResult:
    spec, cfg, rep, tol = args
    y, plan = generate(spec, replication_rng(spec.seed, rep))
    est = geomcp_detect(y, cfg).reconciled
    return ReplicationResult(rep, plan.changepoints, est, tdr_fdr(plan.changepoints, est, tol))


def _fan_out(fn, jobs: list, threads: int) -> list:
    if threads < 1:
        raise ConfigurationError("threads must be at least 1")
    if threads == 1 or len(jobs) < 2:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * threads))))


def run_replications(
    spec: ScenarioSpec,
    reps: int,
    cfg: DetectionConfig | None = None,
    tol: int = DEFAULT_TOLERANCE,
    threads: int = 1,
) -> list[ReplicationResult]:
    """Simulate and score ``reps`` independent data sets.

    Replication ``r`` always uses the generator derived from ``(spec.seed, r)``,
    so the output does not depend on ``threads``.
    """
    if reps < 1:
        raise ConfigurationError("reps must be at least 1")
    cfg = cfg or DetectionConfig()
    jobs = [(spec, cfg, r, tol) for r in range(reps)]
    return _fan_out(_one_replication, jobs, threads)


@dataclass(frozen=True)
class BenchRow:
    n: int
    p: int
    reps: int
    median_seconds: float
    min_seconds: float


def _time_cell(args) -> BenchRow:
    n, p, reps, seed, cfg = args
    spec = ScenarioSpec(n=n, p=p, seed=seed, min_gap=min(30, max(1, n // 4)))
    times = []
    for r in range(reps):
        y, _ = generate(spec, replication_rng(seed, r))
        start = time.perf_counter()
        geomcp_detect(y, cfg)
        times.append(time.perf_counter() - start)
    return BenchRow(n, p, reps, float(np.median(times)), float(np.min(times)))


def benchmark(
    n_grid,
    p_grid,
    reps: int = 3,
    seed: int = 0,
    cfg: DetectionConfig | None = None,
    threads: int = 1,
) -> list[BenchRow]:
    """Wall-clock time of one detection per ``(n, p)`` cell on dense-mean data.

    Timing covers translation, both mappings and both searches; simulation is
    excluded. Use ``threads=1`` for clean timings.
    """
    if reps < 1:
        raise ConfigurationError("reps must be at least 1")
    cfg = cfg or DetectionConfig()
    # warm the compiled kernels so the first cell is not charged for it
    geomcp_detect(np.random.default_rng(seed).standard_normal((20, 3)), cfg)
    jobs = [(int(n), int(p), reps, seed, cfg) for n in n_grid for p in p_grid]
    return _fan_out(_time_cell, jobs, threads)


def scaling_slope(rows: list[BenchRow]) -> float:
    """Least-squares slope of log median time against log ``p``."""
    x = np.log([r.p for r in rows])
    y = np.log([r.median_seconds for r in rows])
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class ValidationRow:
    statistic: str
    p: int
    reps: int
    theory_mean: float
    theory_sd: float
    raw_mean: float
    raw_sd: float
    skewness: float
    excess_kurtosis: float
    ks_statistic: float
    ks_p_value: float


def _validate_cell(args) -> ValidationRow:
    statistic, p, reps, seed, index = args
    rng = replication_rng(seed, index)
    ones = np.ones(p)
    if statistic == "distance":
        th = norm_limit_moments(np.zeros(p), ones)
        st = monte_carlo_distance(0.0, ones, reps, rng)
        mean, sd = th.mean, th.sd
    elif statistic == "sum_of_squares":
        st = monte_carlo_sum_of_squares(ones, reps, rng)
        mean, sd = float(p), math.sqrt(2.0 * p)
    elif statistic == "sum_of_squares_hetero":
        sigma = 1.0 + np.arange(1, p + 1) / p
        st = monte_carlo_sum_of_squares(sigma, reps, rng)
        mean, sd = float(np.sum(sigma**2)), math.sqrt(2.0 * np.sum(sigma**4))
    elif statistic == "angle":
        # no closed form: exploratory only
        st = monte_carlo_angle(1.0, ones, reps, rng)
        mean = sd = math.nan
    else:
        raise ConfigurationError(f"unknown statistic {statistic!r}")
    return ValidationRow(
        statistic, p, reps, mean, sd, st.raw_mean, st.raw_sd,
        st.skewness, st.excess_kurtosis, st.ks_statistic, st.ks_p_value,
    )


VALIDATION_STATISTICS = ("distance", "sum_of_squares", "sum_of_squares_hetero", "angle")


def validation_grid(
    p_grid=(2, 10, 100, 2000),
    reps: int = 20000,
    seed: int = 0,
    statistics=VALIDATION_STATISTICS,
    threads: int = 1,
) -> list[ValidationRow]:
    """Monte-Carlo normality checks, one row per (statistic, ``p``)."""
    jobs = []
    for statistic in statistics:
        for p in p_grid:
            jobs.append((statistic, int(p), reps, seed, len(jobs)))
    return _fan_out(_validate_cell, jobs, threads)
