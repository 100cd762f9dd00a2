# ABOUTME: Errors-package exports.
# ABOUTME: Re-exports the exception hierarchy, RunFailure, interpret_solver_error, and format_error_with_hint.
"""Error handling infrastructure."""

from proxnewton.errors.exceptions import (
    ContractViolation,
    DiagnosticsError,
    EvaluationError,
    NonconvexCurvature,
    ProxNewtonError,
    RunError,
    SolverError,
    UsageError,
)
from proxnewton.errors.error_tracking import RunFailure
from proxnewton.errors.error_interpretation import interpret_solver_error, format_error_with_hint

__all__ = [
    "ProxNewtonError",
    "ContractViolation",
    "SolverError",
    "EvaluationError",
    "NonconvexCurvature",
    "RunError",
    "DiagnosticsError",
    "UsageError",
    "RunFailure",
    "interpret_solver_error",
    "format_error_with_hint",
]
