"""Segment cost models for univariate segmentation.

Two models are provided:

* ``NORMAL_MEANVAR``: twice the negative maximised Normal log-likelihood of a
  segment whose mean and variance are both free.
* ``EMPIRICAL``: a nonparametric cost built from the empirical distribution
  function evaluated at ``K`` fixed quantiles of the whole series.

Costs are queried through a precomputed :class:`CostContext` using the
half-open convention ``(s, t]``: the segment holds ``series[s:t]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ConfigurationError, InputError

__all__ = [
    "CostContext",
    "CostKind",
    "CostModel",
    "choose_quantiles",
    "default_quantile_count",
    "empirical_cost",
    "normal_meanvar_cost",
    "precompute",
    "quantile_levels",
    "segment_cost",
    "segment_costs",
]

LOG_2PI = math.log(2.0 * math.pi)
# Prefix-sum residuals below this many floors (or this fraction of the summed
# squares) are recomputed in two passes, where cancellation cannot hide them.
_GUARD_FLOORS = 16.0
_GUARD_REL = 1e-10


class CostKind(str, enum.Enum):
    NORMAL_MEANVAR = "normal"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class CostModel:
    kind: CostKind = CostKind.NORMAL_MEANVAR
    quantile_count: int | None = None  # EMPIRICAL only; None means ceil(4 ln n)
    variance_floor: float = 1e-8  # NORMAL_MEANVAR only

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", CostKind(self.kind))
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
        if self.quantile_count is not None and self.quantile_count < 1:
            raise ConfigurationError("quantile_count must be at least 1")
        if not self.variance_floor > 0:
            raise ConfigurationError("variance_floor must be positive")

    @property
    def min_segment_length(self) -> int:
        return 2 if self.kind is CostKind.NORMAL_MEANVAR else 1

    @property
    def n_params(self) -> int:
        """Free parameters per segment, as used by the MBIC penalty."""
        return 2 if self.kind is CostKind.NORMAL_MEANVAR else 1


@dataclass(frozen=True, eq=False)
class CostContext:
    """Precomputed statistics answering segment-cost queries in O(1) or O(K)."""

    model: CostModel
    series: np.ndarray
    cumsum: np.ndarray | None = None
    cumsq: np.ndarray | None = None
    quantiles: np.ndarray | None = None
    gamma: float = 0.0
    # cum_counts[k, t] = #{i < t: y_i < q_k} + 0.5 * #{i < t: y_i == q_k}
    cum_counts: np.ndarray | None = field(default=None, repr=False)
    # median-centred copies used for the actual cost arithmetic
    centered: np.ndarray | None = field(default=None, repr=False)
    centered_cumsum: np.ndarray | None = field(default=None, repr=False)
    centered_cumsq: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.series.shape[0]

    def variance(self, s: int, t: int) -> float:
        """Maximum-likelihood variance of ``series[s:t]`` (NORMAL_MEANVAR only)."""
        rss = _normal_rss(s, t, self.centered_cumsum, self.centered_cumsq, self.centered,
                          self.model.variance_floor)
        return rss / (t - s)

    def is_degenerate(self, s: int, t: int) -> bool:
        """True when the segment variance fell below the floor and was clamped."""
        if self.model.kind is not CostKind.NORMAL_MEANVAR:
            return False
        return self.variance(s, t) < self.model.variance_floor


def default_quantile_count(n: int) -> int:
    return max(1, math.ceil(4.0 * math.log(n)))


def quantile_levels(n: int, k: int) -> np.ndarray:
    """Probability levels, denser in the tails, at which the EDF is probed."""
    c = math.log(2 * n - 1)
    idx = np.arange(1, k + 1)
    return 1.0 / (1.0 + (2 * n - 1) * np.exp(-c * (2 * idx - 1) / k))


def choose_quantiles(series, k: int) -> tuple[np.ndarray, float]:
    """Return the ``k`` quantile points of ``series`` and the uniform weight."""
    y = np.asarray(series, dtype=np.float64)
    n = y.shape[0]
    if k < 1:
        raise ConfigurationError("need at least one quantile")
    if n < 2:
        raise InputError("series must have at least 2 points")
    levels = quantile_levels(n, k)
    q = np.quantile(y, levels, method="lower")
    gamma = 2.0 * math.log(2 * n - 1) / k
    return q, gamma


def precompute(series, model: CostModel | None = None) -> CostContext:
    model = model or CostModel()
    y = np.ascontiguousarray(series, dtype=np.float64).ravel()
    if y.shape[0] < 2:
        raise InputError("series must have at least 2 points")
    if not np.all(np.isfinite(y)):
        raise InputError(f"non-finite value at position {int(np.argmin(np.isfinite(y))) + 1}")

    if model.kind is CostKind.NORMAL_MEANVAR:
        cumsum = np.concatenate(([0.0], np.cumsum(y)))
        cumsq = np.concatenate(([0.0], np.cumsum(y * y)))
        z = y - np.median(y)
        return CostContext(
            model=model, series=y, cumsum=cumsum, cumsq=cumsq, centered=z,
            centered_cumsum=np.concatenate(([0.0], np.cumsum(z))),
            centered_cumsq=np.concatenate(([0.0], np.cumsum(z * z))),
        )

    k = model.quantile_count or default_quantile_count(y.shape[0])
    q, gamma = choose_quantiles(y, k)
    below = (y[None, :] < q[:, None]).astype(np.float64)
    below += 0.5 * (y[None, :] == q[:, None])
    cum_counts = np.zeros((k, y.shape[0] + 1))
    np.cumsum(below, axis=1, out=cum_counts[:, 1:])
    return CostContext(model=model, series=y, quantiles=q, gamma=gamma, cum_counts=cum_counts)


def _check_segment(ctx: CostContext, s: int, t: int, min_len: int) -> None:
    if not 0 <= s < t <= ctx.n:
        raise InputError(f"invalid segment ({s}, {t}] for series of length {ctx.n}")
    if t - s < min_len:
        raise InputError(f"segment ({s}, {t}] shorter than the minimum length {min_len}")


def normal_meanvar_cost(ctx: CostContext, s: int, t: int) -> float:
    """Cost ``l * (log 2pi + log var + 1)`` of ``series[s:t]``.

    A variance below the floor is replaced by the floor and the likelihood is
    evaluated there, which keeps the cost the exact minimum over variances of
    at least the floor (and so keeps it split-subadditive).
    """
    _check_segment(ctx, s, t, 2)
    return float(segment_costs(ctx, np.array([s]), t)[0])


def empirical_cost(ctx: CostContext, s: int, t: int) -> float:
    _check_segment(ctx, s, t, 1)
    return float(segment_costs(ctx, np.array([s]), t)[0])


def segment_cost(ctx: CostContext, s: int, t: int) -> float:
    if ctx.model.kind is CostKind.NORMAL_MEANVAR:
        return normal_meanvar_cost(ctx, s, t)
    return empirical_cost(ctx, s, t)


def _xlogx_ratio(a: np.ndarray, total: np.ndarray) -> np.ndarray:
    # a * log(a / total) with 0 log 0 = 0
    out = np.zeros(np.broadcast(a, total).shape)
    pos = a > 0
    np.multiply(a, np.log(np.where(pos, a, 1.0) / total), out=out, where=pos)
    return out


def segment_costs(ctx: CostContext, starts, t: int) -> np.ndarray:
    """Vectorised costs of the segments ``series[s:t]`` for every ``s`` in ``starts``.

    No length checks are performed here.
    """
    starts = np.asarray(starts, dtype=np.int64)
    if ctx.model.kind is CostKind.NORMAL_MEANVAR:
        return _normal_costs(starts, t, ctx.centered_cumsum, ctx.centered_cumsq, ctx.centered,
                             ctx.model.variance_floor)

    length = (t - starts).astype(np.float64)
    a = ctx.cum_counts[:, t][:, None] - ctx.cum_counts[:, starts]
    ll = _xlogx_ratio(a, length) + _xlogx_ratio(length - a, length)
    return -ctx.gamma * ll.sum(axis=0)


@njit(cache=True, inline="always")
def _normal_rss(s, t, csum, csq, z, floor):
    """Residual sum of squares of ``z[s:t]`` from prefix sums, exact near zero."""
    length = t - s
    total = csum[t] - csum[s]
    rss = (csq[t] - csq[s]) - total * total / length
    if rss <= _GUARD_FLOORS * length * floor + _GUARD_REL * (csq[t] + csq[s]):
        mean = 0.0
        for i in range(s, t):
            mean += z[i]
        mean /= length
        rss = 0.0
        for i in range(s, t):
            d = z[i] - mean
            rss += d * d
    if rss < 0.0:
        rss = 0.0
    return rss


@njit(cache=True, inline="always")
def normal_cost_kernel(s, t, csum, csq, z, floor):
    """Floored Normal mean-and-variance cost; shared with the search kernels."""
    length = t - s
    rss = _normal_rss(s, t, csum, csq, z, floor)
    var = rss / length
    if var < floor:
        var = floor
    return length * (LOG_2PI + math.log(var)) + rss / var


@njit(cache=True)
def _normal_costs(starts, t, csum, csq, z, floor):
    out = np.empty(starts.shape[0])
    for i in range(starts.shape[0]):
        out[i] = normal_cost_kernel(starts[i], t, csum, csq, z, floor)
    return out
