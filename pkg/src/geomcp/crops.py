"""Optimal segmentations over a whole range of penalties (CROPS).

For a manual penalty the objective is ``Q(m) + m * beta`` where ``Q(m)`` is
the best unpenalised cost with ``m`` changepoints, so the segmentations that
are optimal for some ``beta`` are the vertices of the lower convex hull of
``(m, Q(m))``. The search probes the penalty at which two known vertices tie
and recurses only where a new vertex turns up.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .costs import CostContext, CostModel, precompute
from .errors import ConfigurationError, InputError
from .pelt import Penalty, PenaltyScheme, Segmentation, pelt

__all__ = ["CropsEntry", "CropsResult", "ElbowRow", "crops", "elbow_table", "write_elbow_csv"]


@dataclass(frozen=True)
class CropsEntry:
    beta_lo: float
    beta_hi: float
    segmentation: Segmentation

    @property
    def m(self) -> int:
        return self.segmentation.m

    @property
    def cost(self) -> float:
        return self.segmentation.unpenalized_cost


@dataclass(frozen=True)
class CropsResult:
    entries: tuple[CropsEntry, ...]  # decreasing m
    beta_min: float
    beta_max: float
    pelt_calls: int

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ElbowRow:
    m: int
    cost: float
    beta_lo: float
    beta_hi: float
    elbow: bool


def default_penalty_range(n: int) -> tuple[float, float]:
    return math.log(n), 50.0 * math.log(n)


def check_penalty(penalty: Penalty | None) -> None:
    """CROPS only makes sense for a penalty linear in the changepoint count."""
    if penalty is not None and penalty.scheme is PenaltyScheme.MBIC:
        raise ConfigurationError(
            "CROPS needs a manual penalty range; MBIC adds per-segment terms "
            "that are not linear in the penalty"
        )


def crops(
    series,
    model: CostModel | None = None,
    beta_min: float | None = None,
    beta_max: float | None = None,
    minseglen: int | None = None,
    context: CostContext | None = None,
) -> CropsResult:
    """All segmentations that are optimal for some penalty in ``[beta_min, beta_max]``."""
    model = model or CostModel()
    ctx = context if context is not None else precompute(series, model)
    n = ctx.n
    lo_default, hi_default = default_penalty_range(n)
    beta_min = lo_default if beta_min is None else float(beta_min)
    beta_max = hi_default if beta_max is None else float(beta_max)
    if not 0 <= beta_min <= beta_max:
        raise InputError(f"need 0 <= beta_min <= beta_max, got [{beta_min}, {beta_max}]")

    calls = 0
    found: dict[int, Segmentation] = {}

    def run(beta: float) -> Segmentation:
        nonlocal calls
        calls += 1
        seg = pelt(ctx.series, model, Penalty.manual(beta), minseglen, context=ctx)
        found.setdefault(seg.m, seg)
        return seg

    low = run(beta_min)
    high = run(beta_max) if beta_max > beta_min else low
    stack = [(low, high)]
    while stack:
        s0, s1 = stack.pop()
        if s0.m <= s1.m + 1:
            continue
        beta = (s1.unpenalized_cost - s0.unpenalized_cost) / (s0.m - s1.m)
        mid = run(beta)
        # Ties resolve to fewer changepoints, so mid.m == s1.m means no vertex lies between.
        if mid.m != s1.m:
            stack.append((s0, mid))
            stack.append((mid, s1))

    segs = sorted(found.values(), key=lambda s: -s.m)
    entries = []
    for i, seg in enumerate(segs):
        if i == 0:
            b_lo = beta_min
        else:
            prev = segs[i - 1]
            b_lo = (seg.unpenalized_cost - prev.unpenalized_cost) / (prev.m - seg.m)
        if i == len(segs) - 1:
            b_hi = beta_max
        else:
            nxt = segs[i + 1]
            b_hi = (nxt.unpenalized_cost - seg.unpenalized_cost) / (seg.m - nxt.m)
        entries.append(CropsEntry(max(b_lo, beta_min), min(b_hi, beta_max), seg))
    return CropsResult(tuple(entries), beta_min, beta_max, calls)


def elbow_table(result: CropsResult) -> list[ElbowRow]:
    """Diagnostic rows by increasing ``m``, with the sharpest bend of ``Q(m)`` flagged.

    The bend at an interior row is the increase in slope of ``Q`` across it;
    end rows count as zero. Ties go to the smaller ``m``.
    """
    if not result.entries:
        raise InputError("empty CROPS result")
    ordered = sorted(result.entries, key=lambda e: e.m)
    ms = [e.m for e in ordered]
    qs = [e.cost for e in ordered]
    bend = [0.0] * len(ordered)
    for i in range(1, len(ordered) - 1):
        left = (qs[i] - qs[i - 1]) / (ms[i] - ms[i - 1])
        right = (qs[i + 1] - qs[i]) / (ms[i + 1] - ms[i])
        bend[i] = right - left
    top = max(bend)
    tol = 1e-9 * max(1.0, abs(top), *(abs(q) for q in qs))
    pick = next(i for i, b in enumerate(bend) if b >= top - tol)
    return [
        ElbowRow(e.m, e.cost, e.beta_lo, e.beta_hi, i == pick)
        for i, e in enumerate(ordered)
    ]


def write_elbow_csv(rows: list[ElbowRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "Q", "beta_lo", "beta_hi", "elbow_flag"])
        for r in rows:
            writer.writerow([r.m, repr(r.cost), repr(r.beta_lo), repr(r.beta_hi), int(r.elbow)])
