"""Stabilizing output-feedback gain intervals for SISO LTI systems."""
from .gain_intervals import (
    AnalysisOptions,
    AnalysisReport,
    BoundaryRoot,
    CriticalGain,
    EmptyStabilizingSet,
    IntervalReport,
    analyze,
    classify_intervals,
    continuous_critical_gains,
    discrete_critical_gains,
    g_poly_discrete,
    phi_poly,
)
from .lti import NonMinimal, StateSpaceSiso, TransferFraction, closed_loop_poly, to_transfer
from .oracle import grid_classify, random_minimal_system
from .poly import RealPoly, all_roots, real_roots
from .stability import StabilityVerdict, bilinear_to_hurwitz, hurwitz_verdict, schur_verdict, verdict

__all__ = [
    "AnalysisOptions",
    "AnalysisReport",
    "BoundaryRoot",
    "CriticalGain",
    "EmptyStabilizingSet",
    "IntervalReport",
    "NonMinimal",
    "RealPoly",
    "StabilityVerdict",
    "StateSpaceSiso",
    "TransferFraction",
    "all_roots",
    "analyze",
    "bilinear_to_hurwitz",
    "classify_intervals",
    "closed_loop_poly",
    "continuous_critical_gains",
    "discrete_critical_gains",
    "g_poly_discrete",
    "grid_classify",
    "hurwitz_verdict",
    "phi_poly",
    "random_minimal_system",
    "real_roots",
    "schur_verdict",
    "to_transfer",
    "verdict",
]
