"""Monte-Carlo checks of the large-``p`` Normal limits behind the mappings.

Two statistics are examined:

* the Euclidean norm ``X = sqrt(sum Y_i^2)`` of independent ``Y_i ~ N(mu_i, sigma_i^2)``,
  whose limiting mean and standard deviation are given by :func:`norm_limit_moments`;
* the sum of squares ``sum Y_i^2`` for centred ``Y_i``, standardised by its exact
  mean ``sum sigma_i^2`` and variance ``2 sum sigma_i^4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConfigurationError, DegenerateInputError, InputError

__all__ = [
    "NormLimitMoments",
    "NormalityStats",
    "monte_carlo_angle",
    "monte_carlo_distance",
    "monte_carlo_sum_of_squares",
    "norm_limit_moments",
    "normality_stats",
]

_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class NormLimitMoments:
    mean: float
    sd: float


@dataclass(frozen=True)
class NormalityStats:
    """Summary of a standardised Monte-Carlo sample.

    ``sample_mean``/``sample_sd`` describe the sample *after* standardisation;
    ``raw_mean``/``raw_sd`` describe the statistic itself.
    """

    sample_mean: float
    sample_sd: float
    skewness: float
    excess_kurtosis: float
    ks_statistic: float
    ks_p_value: float
    raw_mean: float
    raw_sd: float
    reps: int


def norm_limit_moments(mu, sigma, rho: float = 0.0) -> NormLimitMoments:
    """Limiting mean and standard deviation of ``sqrt(sum Y_i^2)``.

    ``rho`` is the correlation between the two Normal components of the
    expansion; it only matters when both ``mu`` and ``sigma`` are nonzero.
    """
    mu = np.asarray(mu, dtype=np.float64).ravel()
    sigma = np.asarray(sigma, dtype=np.float64).ravel()
    if mu.shape != sigma.shape or mu.size == 0:
        raise InputError("mu and sigma must be nonempty and of equal length")
    if np.any(sigma < 0):
        raise InputError("sigma must be nonnegative")
    if not -1.0 <= rho <= 1.0:
        raise ConfigurationError("rho must lie in [-1, 1]")
    second = np.sum(mu**2 + sigma**2)
    if second == 0:
        raise DegenerateInputError("mu and sigma are both identically zero")
    s2 = sigma**2
    # the double sum over i, j factorises
    cross = math.sqrt(2.0 * np.sum(mu**2 * s2) * np.sum(s2**2))
    numerator = 2.0 * np.sum((mu * sigma) ** 2) + np.sum(s2**2) + 2.0 * rho * cross
    variance = numerator / (2.0 * second)
    if variance < -1e-12 * max(1.0, abs(numerator)):
        raise ConfigurationError(f"rho={rho} gives a negative variance")
    return NormLimitMoments(mean=float(math.sqrt(second)), sd=float(math.sqrt(max(variance, 0.0))))


def normality_stats(z: np.ndarray, raw: np.ndarray | None = None) -> NormalityStats:
    """Moments and a KS test against ``N(0, 1)`` for an already standardised sample."""
    z = np.asarray(z, dtype=np.float64)
    raw = z if raw is None else np.asarray(raw, dtype=np.float64)
    ks = stats.kstest(z, "norm", method="asymp")
    return NormalityStats(
        sample_mean=float(z.mean()),
        sample_sd=float(z.std(ddof=1)),
        skewness=float(stats.skew(z)),
        excess_kurtosis=float(stats.kurtosis(z)),
        ks_statistic=float(ks.statistic),
        ks_p_value=float(ks.pvalue),
        raw_mean=float(raw.mean()),
        raw_sd=float(raw.std(ddof=1)),
        reps=int(z.size),
    )


def _sum_of_squares(mu: np.ndarray, sigma: np.ndarray, reps: int, rng: np.random.Generator) -> np.ndarray:
    p = mu.size
    out = np.empty(reps)
    step = max(1, _CHUNK_ELEMENTS // p)
    for start in range(0, reps, step):
        k = min(step, reps - start)
        y = rng.standard_normal((k, p))
        y *= sigma
        y += mu
        out[start : start + k] = np.sum(y * y, axis=1)
    return out


def _vectors(mu, sigma) -> tuple[np.ndarray, np.ndarray]:
    sigma = np.asarray(sigma, dtype=np.float64).ravel()
    mu = np.broadcast_to(np.asarray(mu, dtype=np.float64), sigma.shape).copy()
    return mu, sigma


def monte_carlo_distance(mu, sigma, reps: int, rng: np.random.Generator) -> NormalityStats:
    """Sample ``sqrt(sum Y_i^2)`` and test it for normality after standardising by sample moments."""
    if reps < 1000:
        raise ConfigurationError("use at least 1000 replications")
    mu, sigma = _vectors(mu, sigma)
    x = np.sqrt(_sum_of_squares(mu, sigma, reps, rng))
    sd = x.std(ddof=1)
    if sd == 0:
        raise DegenerateInputError("statistic is constant")
    return normality_stats((x - x.mean()) / sd, raw=x)


def monte_carlo_sum_of_squares(sigma, reps: int, rng: np.random.Generator) -> NormalityStats:
    """Sample ``sum Y_i^2`` for centred Normals and standardise it by its exact moments."""
    if reps < 1000:
        raise ConfigurationError("use at least 1000 replications")
    mu, sigma = _vectors(0.0, sigma)
    x = _sum_of_squares(mu, sigma, reps, rng)
    s2 = sigma**2
    z = (x - s2.sum()) / math.sqrt(2.0 * np.sum(s2**2))
    return normality_stats(z, raw=x)


def monte_carlo_angle(mu, sigma, reps: int, rng: np.random.Generator) -> NormalityStats:
    """Angle between ``Y`` and the all-ones vector, standardised by sample moments.

    Exploratory: no limiting law is asserted for this statistic.
    """
    if reps < 1000:
        raise ConfigurationError("use at least 1000 replications")
    mu, sigma = _vectors(mu, sigma)
    p = mu.size
    out = np.empty(reps)
    step = max(1, _CHUNK_ELEMENTS // p)
    for start in range(0, reps, step):
        k = min(step, reps - start)
        y = rng.standard_normal((k, p)) * sigma + mu
        norm = np.sqrt(np.sum(y * y, axis=1))
        if np.any(norm == 0):
            raise DegenerateInputError("zero vector drawn")
        out[start : start + k] = np.arccos(np.clip(y.sum(axis=1) / (norm * math.sqrt(p)), -1.0, 1.0))
    sd = out.std(ddof=1)
    if sd == 0:
        raise DegenerateInputError("statistic is constant")
    return normality_stats((out - out.mean()) / sd, raw=out)
