"""Exact penalised changepoint search with pruning (PELT).

The search minimises ``sum_k C(segment_k) + m * beta`` over every segmentation
whose segments are at least ``minseglen`` long. Candidates are pruned only
when they provably cannot be the last changepoint of an optimal segmentation,
so the result is the exact minimiser. Ties (within a relative tolerance of
``1e-9``) go to fewer changepoints, then to the lexicographically smallest
changepoint sequence, both here and in :func:`brute_force_segment`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .costs import CostContext, CostKind, CostModel, normal_cost_kernel, precompute, segment_costs
from .errors import ConfigurationError, InputError

__all__ = [
    "Penalty",
    "PenaltyScheme",
    "Segmentation",
    "brute_force_segment",
    "enumerate_segmentations",
    "mbic_penalty",
    "pelt",
    "resolve_penalty",
    "segmentation_objective",
]

TIE_TOL = 1e-9
BRUTE_FORCE_MAX_N = 40


class PenaltyScheme(str, enum.Enum):
    MANUAL = "manual"
    MBIC = "mbic"


@dataclass(frozen=True)
class Penalty:
    """Per-changepoint penalty.

    ``MBIC`` is resolved against the series length at search time: it becomes
    ``(q + 2) * log(n)`` per changepoint, with ``q`` the number of free
    parameters of the cost model, and adds ``log(length)`` to every segment.
    """

    scheme: PenaltyScheme = PenaltyScheme.MBIC
    beta: float | None = None
    segment_log: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", PenaltyScheme(self.scheme))
        if self.scheme is PenaltyScheme.MANUAL:
            if self.beta is None or not (self.beta >= 0) or math.isnan(self.beta):
                raise ConfigurationError(f"manual penalty must be >= 0, got {self.beta}")

    @classmethod
    def manual(cls, beta: float) -> "Penalty":
        return cls(PenaltyScheme.MANUAL, float(beta))

    @classmethod
    def mbic(cls) -> "Penalty":
        return cls(PenaltyScheme.MBIC)


def mbic_penalty(n: float, q_params: int = 2) -> Penalty:
    if not n >= 1:
        raise ConfigurationError(f"MBIC needs n >= 1, got {n}")
    if q_params < 0:
        raise ConfigurationError("q_params must be nonnegative")
    return Penalty(PenaltyScheme.MBIC, (q_params + 2) * math.log(n), segment_log=True)


def resolve_penalty(penalty: Penalty | float | None, n: int, model: CostModel) -> Penalty:
    """Turn a penalty description into a concrete one with a numeric ``beta``."""
    if penalty is None:
        penalty = Penalty.mbic()
    elif not isinstance(penalty, Penalty):
        return Penalty.manual(float(penalty))
    if penalty.scheme is PenaltyScheme.MBIC and penalty.beta is None:
        return mbic_penalty(n, model.n_params)
    return penalty


@dataclass(frozen=True)
class Segmentation:
    """Result of a search.

    ``changepoints`` are the last (1-based) indices of every segment but the
    final one, so segment ``k`` covers ``series[cpts[k-1]:cpts[k]]``.
    ``total_cost`` is the penalised objective; ``unpenalized_cost`` is the
    plain sum of segment costs (without MBIC's per-segment log terms).
    """

    changepoints: tuple[int, ...]
    total_cost: float
    unpenalized_cost: float
    beta: float
    n: int
    degenerate_segments: int = 0
    cost_evaluations: int = 0

    @property
    def m(self) -> int:
        return len(self.changepoints)

    @property
    def segments(self) -> list[tuple[int, int]]:
        bounds = (0, *self.changepoints, self.n)
        return list(zip(bounds[:-1], bounds[1:]))


def _check_search_inputs(series, model: CostModel, minseglen: int | None) -> tuple[np.ndarray, int]:
    y = np.asarray(series, dtype=np.float64).ravel()
    if not np.all(np.isfinite(y)):
        raise InputError("series contains non-finite values")
    if minseglen is None:
        minseglen = 2
    if minseglen < model.min_segment_length:
        raise ConfigurationError(
            f"minseglen must be >= {model.min_segment_length} for the {model.kind.value} cost"
        )
    if y.shape[0] < 2 * minseglen:
        raise InputError(f"series of length {y.shape[0]} is too short for minseglen {minseglen}")
    return y, minseglen


def segmentation_objective(
    ctx: CostContext, changepoints, beta: float, segment_log: bool = False
) -> tuple[float, float, int]:
    """Recompute ``(total, unpenalized, degenerate count)`` for a changepoint set."""
    bounds = [0, *changepoints, ctx.n]
    raw = 0.0
    logs = 0.0
    degenerate = 0
    for s, t in zip(bounds[:-1], bounds[1:]):
        raw += float(segment_costs(ctx, [s], t)[0])
        if segment_log:
            logs += math.log(t - s)
        degenerate += int(ctx.is_degenerate(s, t))
    return raw + logs + len(changepoints) * beta, raw, degenerate


@njit(cache=True)
def _empirical_kernel(s, t, counts, gamma):
    length = t - s
    acc = 0.0
    for k in range(counts.shape[0]):
        a = counts[k, t] - counts[k, s]
        b = length - a
        if a > 0.0:
            acc += a * math.log(a / length)
        if b > 0.0:
            acc += b * math.log(b / length)
    return -gamma * acc


@njit(cache=True)
def _lex_less(a, b, last, buf_a, buf_b):
    na = 0
    x = a
    while x > 0:
        buf_a[na] = x
        na += 1
        x = last[x]
    nb = 0
    x = b
    while x > 0:
        buf_b[nb] = x
        nb += 1
        x = last[x]
    for i in range(min(na, nb)):
        xa = buf_a[na - 1 - i]
        xb = buf_b[nb - 1 - i]
        if xa != xb:
            return xa < xb
    return na < nb


@njit(cache=True, nogil=True)
def _pelt_kernel(kind, cumsum, cumsq, z, counts, gamma, floor, n, beta, segment_log,
                 minseglen, margin, prune, tol):
    inf = np.inf
    opt = np.full(n + 1, inf)
    opt[0] = -beta
    last = np.full(n + 1, -1, dtype=np.int64)
    count = np.zeros(n + 1, dtype=np.int64)
    count[0] = -1
    # candidate s is dropped once t >= removal[s]
    removal = np.full(n + 1, n + 1, dtype=np.int64)
    cands = np.empty(n + 1, dtype=np.int64)
    vals = np.empty(n + 1)
    seg = np.empty(n + 1)
    buf_a = np.empty(n + 1, dtype=np.int64)
    buf_b = np.empty(n + 1, dtype=np.int64)
    ncand = 0
    evals = 0

    for t in range(minseglen, n + 1):
        s_new = t - minseglen
        if opt[s_new] < inf:
            cands[ncand] = s_new
            ncand += 1
        j = 0
        for i in range(ncand):
            s = cands[i]
            if removal[s] > t:
                cands[j] = s
                j += 1
        ncand = j
        if ncand == 0:
            continue

        best = inf
        for i in range(ncand):
            s = cands[i]
            # separate calls keep the Normal path inlined
            if kind == 0:
                c = normal_cost_kernel(s, t, cumsum, cumsq, z, floor)
            else:
                c = _empirical_kernel(s, t, counts, gamma)
            if segment_log:
                c += math.log(t - s)
            seg[i] = c
            vals[i] = opt[s] + c + beta
            if vals[i] < best:
                best = vals[i]
        evals += ncand

        thr = best + tol * max(1.0, abs(best))
        chosen = -1
        chosen_i = -1
        for i in range(ncand):
            if vals[i] > thr:
                continue
            s = cands[i]
            if chosen < 0 or count[s] < count[chosen] or (
                count[s] == count[chosen] and _lex_less(s, chosen, last, buf_a, buf_b)
            ):
                chosen = s
                chosen_i = i
        opt[t] = vals[chosen_i]
        last[t] = chosen
        count[t] = count[chosen] + 1

        if prune:
            slack = tol * max(1.0, abs(opt[t]))
            for i in range(ncand):
                s = cands[i]
                if opt[s] + seg[i] + margin > opt[t] + slack and removal[s] > t + minseglen:
                    removal[s] = t + minseglen
    return opt, last, evals


def _kernel_args(ctx: CostContext):
    empty1 = np.zeros(1)
    empty2 = np.zeros((1, 1))
    if ctx.model.kind is CostKind.NORMAL_MEANVAR:
        return (0, ctx.centered_cumsum, ctx.centered_cumsq, ctx.centered, empty2, 0.0,
                ctx.model.variance_floor)
    return 1, empty1, empty1, empty1, ctx.cum_counts, ctx.gamma, ctx.model.variance_floor


def _backtrack(last: np.ndarray, n: int) -> tuple[int, ...]:
    cpts = []
    t = int(last[n])
    while t > 0:
        cpts.append(t)
        t = int(last[t])
    return tuple(reversed(cpts))


def pelt(
    series,
    model: CostModel | None = None,
    penalty: Penalty | float | None = None,
    minseglen: int | None = None,
    prune: bool = True,
    context: CostContext | None = None,
) -> Segmentation:
    """Globally optimal penalised segmentation of a univariate series.

    Parameters
    ----------
    series : array_like
        Values to segment.
    model : CostModel, optional
        Segment cost; Normal mean-and-variance by default.
    penalty : Penalty or float, optional
        A float is a manual per-changepoint penalty. Defaults to MBIC.
    minseglen : int, optional
        Minimum segment length, 2 by default.
    prune : bool
        Disable to fall back to plain optimal partitioning (same answer, slower).
    context : CostContext, optional
        Reuse precomputed statistics for ``series``.
    """
    model = model or (context.model if context is not None else CostModel())
    y, minseglen = _check_search_inputs(series, model, minseglen)
    n = y.shape[0]
    pen = resolve_penalty(penalty, n, model)
    ctx = context if context is not None else precompute(y, model)

    # log(length) per segment breaks plain subadditivity by at most log(n/4).
    margin = -math.log(n / 4.0) if pen.segment_log and n > 4 else 0.0
    kind, cumsum, cumsq, z, counts, gamma, floor = _kernel_args(ctx)
    opt, last, evals = _pelt_kernel(
        kind, cumsum, cumsq, z, counts, gamma, floor, n, float(pen.beta), pen.segment_log,
        minseglen, margin, prune, TIE_TOL,
    )
    cpts = _backtrack(last, n)
    total, raw, degenerate = segmentation_objective(ctx, cpts, pen.beta, pen.segment_log)
    return Segmentation(
        changepoints=cpts,
        total_cost=total,
        unpenalized_cost=raw,
        beta=float(pen.beta),
        n=n,
        degenerate_segments=degenerate,
        cost_evaluations=int(evals),
    )


def enumerate_segmentations(series, model: CostModel | None = None, minseglen: int | None = None,
                            segment_log: bool = False) -> list[tuple[float, tuple[int, ...]]]:
    """Every admissible segmentation with its summed segment cost.

    Exponential in ``n``; meant for testing only.
    """
    model = model or CostModel()
    y, minseglen = _check_search_inputs(series, model, minseglen)
    n = y.shape[0]
    if n > BRUTE_FORCE_MAX_N:
        raise InputError(f"refusing exhaustive search on n={n} > {BRUTE_FORCE_MAX_N}")
    ctx = precompute(y, model)
    table = [[math.nan] * (n + 1) for _ in range(n + 1)]
    for t in range(minseglen, n + 1):
        starts = np.arange(0, t - minseglen + 1)
        costs = segment_costs(ctx, starts, t)
        if segment_log:
            costs = costs + np.log(t - starts)
        for s, c in zip(starts.tolist(), costs.tolist()):
            table[s][t] = c

    out: list[tuple[float, tuple[int, ...]]] = []

    def walk(s: int, acc: float, cpts: tuple[int, ...]) -> None:
        row = table[s]
        out.append((acc + row[n], cpts))
        for u in range(s + minseglen, n - minseglen + 1):
            walk(u, acc + row[u], cpts + (u,))

    walk(0, 0.0, ())
    return out


def select_optimal(candidates, beta: float) -> tuple[float, tuple[int, ...]]:
    """Pick the penalised optimum from ``enumerate_segmentations`` output."""
    scored = [(q + len(c) * beta, c) for q, c in candidates]
    best = min(v for v, _ in scored)
    thr = best + TIE_TOL * max(1.0, abs(best))
    tied = [(len(c), c, v) for v, c in scored if v <= thr]
    _, cpts, value = min(tied, key=lambda x: (x[0], x[1]))
    return value, cpts


def brute_force_segment(
    series,
    model: CostModel | None = None,
    penalty: Penalty | float | None = None,
    minseglen: int | None = None,
) -> Segmentation:
    """Exhaustive-search counterpart of :func:`pelt` (``n <= 40``)."""
    model = model or CostModel()
    y, minseglen = _check_search_inputs(series, model, minseglen)
    pen = resolve_penalty(penalty, y.shape[0], model)
    candidates = enumerate_segmentations(y, model, minseglen, pen.segment_log)
    _, cpts = select_optimal(candidates, pen.beta)
    ctx = precompute(y, model)
    total, raw, degenerate = segmentation_objective(ctx, cpts, pen.beta, pen.segment_log)
    return Segmentation(cpts, total, raw, float(pen.beta), y.shape[0], degenerate)
