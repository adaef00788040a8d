"""Sparse reconstruction of the input spectrum from the aliased down-converted bins."""

from .coset import CosetSystem, MatrixSpec, build_coset_system, build_degenerate_system
from .detection import SweepResult, detection_limit_sweep
from .metrics import (
    DetectedBand,
    Metrics,
    band_intervals,
    detected_bands,
    downconverted_error,
    evaluate,
    predict_measurement,
    relative_error,
    sfdr_report,
    spurious_bins,
)
from .solvers import (
    RankDeficiencyWarning,
    best_residual_at_size,
    exhaustive_table,
    residual_power,
    solve_exhaustive_l0,
    solve_omp,
    support_of,
)
from .spectrum import BinDiagnostics, ReconstructedSpectrum, one_sided, reconstruct_full

__all__ = [
    "BinDiagnostics",
    "CosetSystem",
    "DetectedBand",
    "MatrixSpec",
    "Metrics",
    "RankDeficiencyWarning",
    "ReconstructedSpectrum",
    "SweepResult",
    "band_intervals",
    "best_residual_at_size",
    "build_coset_system",
    "build_degenerate_system",
    "detected_bands",
    "detection_limit_sweep",
    "downconverted_error",
    "evaluate",
    "exhaustive_table",
    "one_sided",
    "predict_measurement",
    "reconstruct_full",
    "relative_error",
    "residual_power",
    "sfdr_report",
    "solve_exhaustive_l0",
    "solve_omp",
    "spurious_bins",
    "support_of",
]
