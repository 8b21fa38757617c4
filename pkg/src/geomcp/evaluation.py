"""Scoring estimated changepoints against the truth.

An estimate is correct when it is the closest estimate to some true
changepoint and lies within ``tol`` of it. Everything else is a false
detection. Equal distances go to the smaller index, on either side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

__all__ = ["BatchSummary", "EvalReport", "fpr", "match_changepoints", "summarize", "tdr_fdr"]

DEFAULT_TOLERANCE = 10


@dataclass(frozen=True)
class EvalReport:
    tdr: float
    fdr: float
    true_count: int
    est_count: int
    correct_count: int
    false_count: int
    tolerance: int = DEFAULT_TOLERANCE


def _sorted_unique(values, name: str) -> list[int]:
    out = [int(v) for v in values]
    if any(b <= a for a, b in zip(out, out[1:])):
        raise InputError(f"{name} must be strictly increasing")
    return out


def match_changepoints(truth, est, tol: int = DEFAULT_TOLERANCE) -> dict[int, int]:
    """Map each correct estimate to the true changepoint it detects."""
    truth = _sorted_unique(truth, "truth")
    est = _sorted_unique(est, "estimates")
    matches: dict[int, int] = {}
    if not est:
        return matches
    for tau in truth:
        # smallest estimate at minimal distance
        best = min(est, key=lambda e: (abs(e - tau), e))
        if abs(best - tau) <= tol and best not in matches:
            matches[best] = tau
    return matches


def tdr_fdr(truth, est, tol: int = DEFAULT_TOLERANCE) -> EvalReport:
    matches = match_changepoints(truth, est, tol)
    n_true, n_est = len(truth), len(est)
    correct = len(matches)
    false = n_est - correct
    return EvalReport(
        tdr=correct / n_true if n_true else 0.0,
        fdr=false / n_est if n_est else 0.0,
        true_count=n_true,
        est_count=n_est,
        correct_count=correct,
        false_count=false,
        tolerance=tol,
    )


def fpr(detected_counts) -> float:
    """Average number of detections per replication on changepoint-free data."""
    counts = list(detected_counts)
    if not counts:
        raise InputError("FPR needs at least one replication")
    return float(sum(counts)) / len(counts)


@dataclass(frozen=True)
class BatchSummary:
    """Replication averages of per-replication rates, with two-standard-error half-widths."""

    reps: int
    tdr: float
    fdr: float
    tdr_halfwidth: float
    fdr_halfwidth: float
    fpr: float


def _halfwidth(x: np.ndarray) -> float:
    if x.size < 2:
        return math.nan
    return float(2.0 * x.std(ddof=1) / math.sqrt(x.size))


def summarize(reports: list[EvalReport]) -> BatchSummary:
    if not reports:
        raise InputError("nothing to summarise")
    tdr = np.array([r.tdr for r in reports])
    fdr = np.array([r.fdr for r in reports])
    return BatchSummary(
        reps=len(reports),
        tdr=float(tdr.mean()),
        fdr=float(fdr.mean()),
        tdr_halfwidth=_halfwidth(tdr),
        fdr_halfwidth=_halfwidth(fdr),
        fpr=fpr(r.est_count for r in reports),
    )
