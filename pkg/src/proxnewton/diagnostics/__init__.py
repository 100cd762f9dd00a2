# ABOUTME: Subpackage exports for solver diagnostics.
# ABOUTME: Re-exports gradient mappings, tight solves, true relative errors and convexity bounds from stationarity.py.
"""Reference computations for stationarity and inexactness diagnostics."""
from proxnewton.diagnostics.stationarity import (
    ConvexityBounds,
    GradientMappingQuery,
    TargetKind,
    composite_gradient_mapping,
    estimate_convexity,
    gradient_mapping_bounds_check,
    gradient_mapping_norm,
    scaled_dual_prox,
    tight_solve,
    true_relative_error,
)

__all__ = [
    "ConvexityBounds",
    "GradientMappingQuery",
    "TargetKind",
    "composite_gradient_mapping",
    "estimate_convexity",
    "gradient_mapping_bounds_check",
    "gradient_mapping_norm",
    "scaled_dual_prox",
    "tight_solve",
    "true_relative_error",
]
