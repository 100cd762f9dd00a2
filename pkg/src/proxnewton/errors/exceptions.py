# ABOUTME: Exception hierarchy shared by the solver core, diagnostics, and CLI.
# ABOUTME: Library code raises these; only the CLI maps them onto exit codes.
"""Exception types for proxnewton."""

from typing import Any, Optional


class ProxNewtonError(Exception):
    """Base class for all proxnewton errors."""


class ContractViolation(ProxNewtonError, ValueError):
    """A precondition of an operation was violated (dimensions, parameter ranges)."""


class SolverError(ProxNewtonError):
    """Linear algebra failure: non-SPD factorization or a negative radicand in a norm."""


class EvaluationError(ProxNewtonError):
    """A non-finite value appeared while evaluating f, its derivatives, or a model.

    Gauss-quadrature terms locate the value by ``element_index``, lumped nodal
    terms by ``node_index``.
    """

    def __init__(
        self, message: str, element_index: Optional[int] = None, node_index: Optional[int] = None
    ):
        super().__init__(message)
        self.element_index = element_index
        self.node_index = node_index


class NonconvexCurvature(ProxNewtonError):
    """Nonpositive curvature met in a scalar prox or a CG step; the caller must raise omega."""


class RunError(ProxNewtonError):
    """The outer loop could not produce an acceptable step within its rejection budget."""

    def __init__(self, message: str, last_record: Any = None):
        super().__init__(message)
        self.last_record = last_record


class DiagnosticsError(ProxNewtonError):
    """A diagnostic quantity is undefined for the given input."""


class UsageError(ProxNewtonError):
    """Malformed command line or config file."""
