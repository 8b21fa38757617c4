"""Synthetic multivariate series with planted changes in mean and/or variance.

Change sizes are scaled with the dimension so that detection difficulty stays
roughly constant in ``p``:

* the mean shifts summed over series equal ``sqrt(p) * theta``;
* the product over series of the standard-deviation ratios equals
  ``phi ** sqrt(p)``.

Each series changes with probability ``kappa`` at each changepoint, and the
total is split evenly over the *expected* number of changing series,
``kappa * p``. Successive changepoints alternate direction (up, down, up, ...).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError

__all__ = [
    "ChangeKind",
    "ChangePlan",
    "CovarianceKind",
    "ScenarioSpec",
    "channel_plan",
    "covariance_matrix",
    "default_changepoint_count",
    "dependence_plan",
    "generate",
    "place_changepoints",
    "plan_changes",
    "replication_rng",
    "sample_plan",
]

MAX_REJECTIONS = 100_000


class ChangeKind(str, enum.Enum):
    MEAN = "mean"
    VARIANCE = "variance"
    MEAN_AND_VARIANCE = "meanvar"


class CovarianceKind(str, enum.Enum):
    INDEPENDENT = "independent"
    BLOCK_DIAGONAL = "block"
    RANDOM = "random"


def default_changepoint_count(n: int) -> int:
    return math.ceil(n / 200)


@dataclass(frozen=True)
class ScenarioSpec:
    n: int = 200
    p: int = 100
    theta: float = 1.2
    phi: float = 3.0
    kappa: float = 1.0
    change_kind: ChangeKind = ChangeKind.MEAN
    covariance: CovarianceKind = CovarianceKind.INDEPENDENT
    m: int | None = None
    min_gap: int = 30
    seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "change_kind", ChangeKind(self.change_kind))
            object.__setattr__(self, "covariance", CovarianceKind(self.covariance))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        if self.n < 2 or self.p < 1:
            raise ConfigurationError(f"need n >= 2 and p >= 1, got n={self.n}, p={self.p}")
        if not self.phi > 0:
            raise ConfigurationError("phi must be positive")
        if not 0 < self.kappa <= 1:
            raise ConfigurationError("kappa must lie in (0, 1]")
        if self.m is not None and self.m < 0:
            raise ConfigurationError("m must be nonnegative")
        if self.n_changepoints >= 1 and self.n < 2 * self.min_gap:
            raise ConfigurationError(f"n={self.n} is too short for min_gap={self.min_gap}")

    @property
    def n_changepoints(self) -> int:
        return default_changepoint_count(self.n) if self.m is None else self.m

    @property
    def mean_shift(self) -> float:
        """Per-series mean shift for a series that changes."""
        return math.sqrt(self.p) * self.theta / (self.kappa * self.p)

    @property
    def sd_ratio(self) -> float:
        """Per-series standard-deviation ratio for a series that changes."""
        return self.phi ** (math.sqrt(self.p) / (self.kappa * self.p))


@dataclass(frozen=True, eq=False)
class ChangePlan:
    """Ground truth: changepoints and per-segment means and standard deviations.

    Row ``k`` of ``means``/``sds`` applies to segment ``k``; ``masks[k]`` marks
    the series that change at ``changepoints[k]``. ``covariance`` is the base
    correlation structure (``None`` for independent series).
    """

    changepoints: tuple[int, ...]
    means: np.ndarray
    sds: np.ndarray
    masks: np.ndarray
    covariance: np.ndarray | None = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.means.shape[1]

    def segment_index(self, n: int) -> np.ndarray:
        bounds = np.array(self.changepoints, dtype=np.int64)
        return np.searchsorted(bounds, np.arange(n), side="right")


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    """Independent generator for replication ``rep`` of a seeded batch."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep,)))


def _feasible(n: int, m: int, min_gap: int) -> bool:
    return (m + 1) * min_gap <= n


def place_changepoints(n: int, m: int, min_gap: int, rng: np.random.Generator) -> tuple[int, ...]:
    """``m`` changepoints uniformly at random, pairwise and from both ends at least ``min_gap`` apart."""
    if m < 0:
        raise InputError("m must be nonnegative")
    if m == 0:
        return ()
    if not _feasible(n, m, min_gap):
        raise InputError(f"cannot place {m} changepoints {min_gap} apart in {n} points")
    lo, hi = min_gap, n - min_gap
    for _ in range(MAX_REJECTIONS):
        cand = np.sort(rng.choice(np.arange(lo, hi + 1), size=m, replace=False))
        if np.all(np.diff(cand) >= min_gap):
            return tuple(int(c) for c in cand)
    # Exact fallback: feasible sets biject with m-subsets of range(slack + m).
    slack = n - (m + 1) * min_gap
    picks = np.sort(rng.choice(slack + m, size=m, replace=False))
    return tuple(int(c - k + (k + 1) * min_gap) for k, c in enumerate(picks))


def plan_changes(spec: ScenarioSpec, changepoints, rng: np.random.Generator) -> ChangePlan:
    cpts = tuple(int(c) for c in changepoints)
    p = spec.p
    if spec.kappa * p < 1:
        warnings.warn(
            f"kappa * p = {spec.kappa * p:.3g} < 1: fewer than one series expected to change",
            stacklevel=2,
        )
    m = len(cpts)
    means = np.zeros((m + 1, p))
    sds = np.ones((m + 1, p))
    masks = np.zeros((m, p), dtype=bool)
    shift_mean = spec.change_kind in (ChangeKind.MEAN, ChangeKind.MEAN_AND_VARIANCE)
    shift_sd = spec.change_kind in (ChangeKind.VARIANCE, ChangeKind.MEAN_AND_VARIANCE)
    for k in range(m):
        mask = np.ones(p, dtype=bool) if spec.kappa >= 1 else rng.random(p) < spec.kappa
        masks[k] = mask
        sign = 1.0 if k % 2 == 0 else -1.0
        means[k + 1] = means[k]
        sds[k + 1] = sds[k]
        if shift_mean:
            means[k + 1, mask] += sign * spec.mean_shift
        if shift_sd:
            sds[k + 1, mask] *= spec.sd_ratio**sign
    cov = None
    if spec.covariance is not CovarianceKind.INDEPENDENT:
        cov = covariance_matrix(spec.covariance, p, rng)
    return ChangePlan(cpts, means, sds, masks, cov)


def covariance_matrix(kind: CovarianceKind | str, p: int, rng: np.random.Generator) -> np.ndarray:
    kind = CovarianceKind(kind)
    if kind is CovarianceKind.INDEPENDENT:
        return np.eye(p)
    if p < 2:
        raise InputError("covariance structures need p >= 2")
    if kind is CovarianceKind.BLOCK_DIAGONAL:
        if p % 2:
            raise InputError("block-diagonal covariance needs an even p")
        rho = rng.uniform(0.3, 0.6, size=p // 2) * rng.choice([-1.0, 1.0], size=p // 2)
        cov = np.eye(p)
        idx = np.arange(0, p, 2)
        cov[idx, idx + 1] = rho
        cov[idx + 1, idx] = rho
        return cov
    q, r = np.linalg.qr(rng.standard_normal((p, p)))
    q *= np.sign(np.diag(r))
    eig = np.linspace(30.0, 1.0, p)
    cov = (q * eig) @ q.T
    return (cov + cov.T) / 2.0


def sample_plan(plan: ChangePlan, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an ``n x p`` matrix following ``plan``."""
    if plan.changepoints and not (0 < plan.changepoints[0] and plan.changepoints[-1] < n):
        raise InputError("changepoints must lie strictly inside the series")
    z = rng.standard_normal((n, plan.p))
    if plan.covariance is not None:
        z = z @ np.linalg.cholesky(plan.covariance).T
    seg = plan.segment_index(n)
    z *= plan.sds[seg]
    z += plan.means[seg]
    return z


def generate(spec: ScenarioSpec, rng: np.random.Generator | None = None) -> tuple[np.ndarray, ChangePlan]:
    """Simulate one data set for ``spec``; reproducible from ``spec.seed`` when no ``rng`` is given."""
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    cpts = place_changepoints(spec.n, spec.n_changepoints, spec.min_gap, rng)
    plan = plan_changes(spec, cpts, rng)
    return sample_plan(plan, spec.n, rng), plan


def channel_plan(
    p: int = 200,
    changepoints=(250, 500, 750),
    mean_step: float = 0.1,
    variance_factor: float = 1.2,
) -> ChangePlan:
    """Three changes in all series: mean up, then variance up, then both back down."""
    sd_step = math.sqrt(variance_factor)
    means = np.array([0.0, mean_step, mean_step, 0.0])[:, None] * np.ones(p)
    sds = np.array([1.0, 1.0, sd_step, 1.0])[:, None] * np.ones(p)
    masks = np.ones((3, p), dtype=bool)
    return ChangePlan(tuple(changepoints), means, sds, masks)


def dependence_plan(
    kind: CovarianceKind | str,
    change: ChangeKind | str,
    size: float,
    p: int = 100,
    tau: int = 100,
    rng: np.random.Generator | None = None,
) -> ChangePlan:
    """Single change at ``tau`` on top of a correlated base.

    A mean change moves every series from 0 to ``size``; a variance change
    multiplies the covariance matrix by ``size``.
    """
    rng = rng if rng is not None else np.random.default_rng()
    change = ChangeKind(change)
    cov = covariance_matrix(kind, p, rng)
    means = np.zeros((2, p))
    sds = np.ones((2, p))
    if change is ChangeKind.MEAN:
        means[1] = size
    elif change is ChangeKind.VARIANCE:
        if not size > 0:
            raise ConfigurationError("covariance scale must be positive")
        sds[1] = math.sqrt(size)
    else:
        raise ConfigurationError("dependence scenarios change either the mean or the variance")
    cov_or_none = None if CovarianceKind(kind) is CovarianceKind.INDEPENDENT else cov
    return ChangePlan((tau,), means, sds, np.ones((1, p), dtype=bool), cov_or_none)
