"""Pointwise classification of local infinitesimal isometries on surfaces."""

from .kmatrix import (
    ROW_LABELS,
    Classification,
    KMatrix,
    Symmetry,
    classify_point,
    classify_values,
    gradient_threshold,
    jet_with_error,
    k_matrix,
    matrix_from_jet,
    rank_threshold,
    torsion_t,
    torsion_t12,
)
from .scan import GridSpec, ScanResult, scan_region, stencil_reach

__all__ = [
    "ROW_LABELS",
    "Classification",
    "GridSpec",
    "KMatrix",
    "ScanResult",
    "Symmetry",
    "classify_point",
    "classify_values",
    "gradient_threshold",
    "jet_with_error",
    "k_matrix",
    "matrix_from_jet",
    "rank_threshold",
    "scan_region",
    "stencil_reach",
    "torsion_t",
    "torsion_t12",
]
