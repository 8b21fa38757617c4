"""Changepoint detection in high-dimensional time series via distance and angle mappings."""

from .costs import CostKind, CostModel, precompute, segment_cost
from .crops import CropsResult, crops, elbow_table
from .errors import (
    ConfigurationError,
    DegenerateInputError,
    GeomCPError,
    InputError,
    InvariantError,
)
from .evaluation import EvalReport, fpr, summarize, tdr_fdr
from .geometry import angle_map, distance_map, translate
from .io import load_csv, save_csv, scale_mad
from .pelt import Penalty, Segmentation, brute_force_segment, mbic_penalty, pelt
from .pipeline import DetectionConfig, DetectionResult, geomcp_detect, reconcile
from .simulation import ChangeKind, CovarianceKind, ScenarioSpec, generate

__all__ = [
    "ChangeKind",
    "ConfigurationError",
    "CostKind",
    "CostModel",
    "CovarianceKind",
    "CropsResult",
    "DegenerateInputError",
    "DetectionConfig",
    "DetectionResult",
    "EvalReport",
    "GeomCPError",
    "InputError",
    "InvariantError",
    "Penalty",
    "ScenarioSpec",
    "Segmentation",
    "angle_map",
    "brute_force_segment",
    "crops",
    "distance_map",
    "elbow_table",
    "fpr",
    "generate",
    "geomcp_detect",
    "load_csv",
    "mbic_penalty",
    "pelt",
    "precompute",
    "reconcile",
    "save_csv",
    "scale_mad",
    "segment_cost",
    "summarize",
    "tdr_fdr",
    "translate",
]

__version__ = "0.1.0"
