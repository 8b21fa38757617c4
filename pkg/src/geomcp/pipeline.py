"""End-to-end detection: translate, map, segment both mapped series, reconcile."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .costs import CostModel
from .errors import ConfigurationError, InputError
from .geometry import MappedSeries, angle_map, as_series_matrix, distance_map, translate
from .io import scale_mad
from .pelt import Penalty, Segmentation, pelt

__all__ = [
    "DetectionConfig",
    "DetectionResult",
    "geomcp_detect",
    "reconcile",
    "write_changepoint_csv",
    "format_report",
]


@dataclass(frozen=True)
class DetectionConfig:
    xi: int = 10
    model: CostModel = field(default_factory=CostModel)
    penalty: Penalty = field(default_factory=Penalty.mbic)
    minseglen: int = 2
    scale_first: bool = False
    parallel: bool = False

    def __post_init__(self):
        if self.xi < 0:
            raise ConfigurationError("xi must be nonnegative")
        if self.minseglen < self.model.min_segment_length:
            raise ConfigurationError(
                f"minseglen must be >= {self.model.min_segment_length} for the "
                f"{self.model.kind.value} cost"
            )


@dataclass(frozen=True, eq=False)
class DetectionResult:
    distance_cpts: tuple[int, ...]
    angle_cpts: tuple[int, ...]
    reconciled: tuple[int, ...]
    distance: MappedSeries
    angle: MappedSeries
    distance_segmentation: Segmentation
    angle_segmentation: Segmentation
    xi: int

    def sources(self) -> list[tuple[int, str]]:
        """Label every reconciled changepoint by the mapped series that found it."""
        out = []
        angles = set(self.angle_cpts)
        for tau in self.reconciled:
            if tau in angles:
                hit = any(abs(d - tau) <= self.xi for d in self.distance_cpts)
                out.append((tau, "both" if hit else "angle"))
            else:
                out.append((tau, "distance"))
        return out


def reconcile(dist, ang, xi: int) -> tuple[int, ...]:
    """Merge the two changepoint sets.

    A distance changepoint within ``xi`` of any angle changepoint is dropped in
    favour of the angle location.
    """
    if xi < 0:
        raise ConfigurationError("xi must be nonnegative")
    ang = sorted(int(a) for a in ang)
    kept = [int(d) for d in dist if not ang or min(abs(d - a) for a in ang) > xi]
    return tuple(sorted(set(ang) | set(kept)))


def geomcp_detect(values, cfg: DetectionConfig | None = None) -> DetectionResult:
    cfg = cfg or DetectionConfig()
    y = as_series_matrix(values)
    if y.shape[0] < 2 * cfg.minseglen:
        raise InputError(f"{y.shape[0]} time points is too few for minseglen {cfg.minseglen}")
    if cfg.scale_first:
        y = scale_mad(y)
    shifted = translate(y)
    dist = distance_map(shifted)
    ang = angle_map(shifted)

    def search(series: MappedSeries) -> Segmentation:
        return pelt(series.values, cfg.model, cfg.penalty, cfg.minseglen)

    if cfg.parallel:
        with ThreadPoolExecutor(max_workers=2) as pool:
            seg_d, seg_a = pool.map(search, (dist, ang))
    else:
        seg_d, seg_a = search(dist), search(ang)
    return DetectionResult(
        distance_cpts=seg_d.changepoints,
        angle_cpts=seg_a.changepoints,
        reconciled=reconcile(seg_d.changepoints, seg_a.changepoints, cfg.xi),
        distance=dist,
        angle=ang,
        distance_segmentation=seg_d,
        angle_segmentation=seg_a,
        xi=cfg.xi,
    )


def write_changepoint_csv(result: DetectionResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "source"])
        writer.writerows(result.sources())


def format_report(result: DetectionResult) -> str:
    n = len(result.distance)
    lines = [
        f"time points: {n}",
        f"reconciliation threshold: {result.xi}",
        f"distance changepoints ({len(result.distance_cpts)}): "
        + (", ".join(map(str, result.distance_cpts)) or "none"),
        f"angle changepoints ({len(result.angle_cpts)}): "
        + (", ".join(map(str, result.angle_cpts)) or "none"),
        f"reconciled changepoints ({len(result.reconciled)}):",
    ]
    for tau, src in result.sources():
        lines.append(f"  {tau:>8d}  {src}")
    if not result.reconciled:
        lines.append("  none")
    d, a = result.distance.values, result.angle.values
    lines.append(f"distance range: [{np.min(d):.6g}, {np.max(d):.6g}]")
    lines.append(f"angle range: [{np.min(a):.6g}, {np.max(a):.6g}]")
    return "\n".join(lines) + "\n"
