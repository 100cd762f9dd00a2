# ABOUTME: Reference computations for tests and diagnostic runs: scaled dual prox, composite gradient mapping, true relative errors.
# ABOUTME: Every quantity here needs an extra tight subproblem solve or a dense eigenproblem, so none of it runs inside the solver loop.
"""Stationarity diagnostics.

The scaled dual proximal mapping

    P_g^H(l) = argmin_z g(z) + 1/2 H(z, z) - l(z)

is evaluated with the subsolver in tight mode (base point 0, f'(0) = -l,
omega = 0). The composite gradient mapping of phi + g is then

    G_tau(y) = tau [y - P_g^{tau R}(tau R y - phi'(y))]

which vanishes exactly at critical points.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from proxnewton import config
from proxnewton.core.criteria import StoppingMode, make_stopping_policy
from proxnewton.core.hilbert import (
    BilinearForm,
    DualFunctional,
    PrimalVector,
    apply_gram,
    primal_norm,
)
from proxnewton.core.problem import CompositeProblem
from proxnewton.core.subsolver import (
    SubproblemSpec,
    SubsolverSettings,
    Termination,
    solve_subproblem,
)
from proxnewton.errors.exceptions import ContractViolation, DiagnosticsError, SolverError

# Reference solves run long and solve the linear correction accurately
TIGHT_SETTINGS = SubsolverSettings(max_inner=2000, cg_rtol=1e-10, cg_maxiter=2000)
DEFAULT_TIGHT_TOL = 1e-12
BOUND_SLACK = 1e-6


class TargetKind(str, Enum):
    OBJECTIVE = "objective"
    MODEL = "model"


@dataclass(frozen=True)
class GradientMappingQuery:
    """Which gradient mapping to evaluate, with parameter tau, at which point.

    For ``target=MODEL`` the quadratic model around ``model_spec.x`` with
    regularization ``model_spec.omega`` is used.
    """

    target: TargetKind
    tau: float
    point: PrimalVector
    model_spec: Optional[SubproblemSpec] = None

    def __post_init__(self):
        if not self.tau > 0.0:
            raise ContractViolation(f"tau must be positive, got {self.tau}")
        if self.target is TargetKind.MODEL and self.model_spec is None:
            raise ContractViolation("model target needs a model_spec")


@dataclass(frozen=True)
class ConvexityBounds:
    """Operator norm of H_x in L(X, X*) and its smallest generalized eigenvalue kappa1."""

    hess_norm: float
    kappa1: float


def tight_solve(
    spec: SubproblemSpec,
    tight_tol: float = DEFAULT_TIGHT_TOL,
    settings: SubsolverSettings = TIGHT_SETTINGS,
) -> PrimalVector:
    """Solve one subproblem to relative correction tolerance ``tight_tol``."""
    policy = make_stopping_policy(StoppingMode.TIGHT, tight_tol=tight_tol)
    result = solve_subproblem(spec, policy, settings)
    if result.terminated_by is Termination.NONCONVEXITY:
        raise SolverError(f"tight solve met nonpositive curvature at omega={spec.omega:.3e}")
    return result.step


def scaled_dual_prox(
    problem: CompositeProblem,
    H: BilinearForm,
    ell: DualFunctional,
    tight_tol: float = DEFAULT_TIGHT_TOL,
) -> PrimalVector:
    """P_g^H(ell): minimizer of g(z) + 1/2 H(z, z) - ell(z)."""
    n = problem.num_dofs
    spec = SubproblemSpec(
        x=PrimalVector.zeros(n),
        grad=DualFunctional(np.where(problem.boundary_mask, 0.0, -ell.coeffs)),
        hess=sp.csr_matrix(H),
        omega=0.0,
        problem=problem,
    )
    return tight_solve(spec, tight_tol)


def _smooth_derivative(problem: CompositeProblem, query: GradientMappingQuery) -> DualFunctional:
    if query.target is TargetKind.OBJECTIVE:
        return problem.eval_grad_f(query.point)
    spec = query.model_spec
    shift = query.point.coeffs - spec.x.coeffs
    return DualFunctional(spec.grad.coeffs + spec.system_matrix @ shift)


def composite_gradient_mapping(
    problem: CompositeProblem,
    query: GradientMappingQuery,
    tight_tol: float = DEFAULT_TIGHT_TOL,
) -> PrimalVector:
    """G_tau(y) = tau [y - P_g^{tau R}(tau R y - phi'(y))] for phi = f or the quadratic model."""
    tau = query.tau
    y = query.point
    ell = tau * apply_gram(problem.gram, y) - _smooth_derivative(problem, query)
    H = sp.csr_matrix(tau * problem.gram.matrix)
    prox = scaled_dual_prox(problem, H, ell, tight_tol)
    return tau * (y - prox)


def gradient_mapping_norm(
    problem: CompositeProblem,
    query: GradientMappingQuery,
    tight_tol: float = DEFAULT_TIGHT_TOL,
) -> float:
    return primal_norm(problem.gram, composite_gradient_mapping(problem, query, tight_tol))


def true_relative_error(
    problem: CompositeProblem,
    spec: SubproblemSpec,
    inexact_step: PrimalVector,
    tight_tol: float = DEFAULT_TIGHT_TOL,
) -> float:
    """|Dx - Ds|_X / |Dx|_X with Dx from a tight solve of the same subproblem."""
    if tight_tol > 1e-12:
        raise ContractViolation(f"tight_tol must be <= 1e-12, got {tight_tol}")
    exact = tight_solve(spec, tight_tol)
    exact_norm = primal_norm(problem.gram, exact)
    if exact_norm == 0.0:
        raise DiagnosticsError("exact step is zero; relative error is undefined")
    return primal_norm(problem.gram, exact - inexact_step) / exact_norm


def _free_block(problem: CompositeProblem, H: BilinearForm):
    free = ~problem.boundary_mask
    H_dense = sp.csr_matrix(H)[free][:, free].toarray()
    R_dense = problem.gram.matrix.tocsr()[free][:, free].toarray()
    return H_dense, R_dense


def estimate_convexity(problem: CompositeProblem, x: PrimalVector) -> ConvexityBounds:
    """|H_x| and kappa1 from the dense generalized eigenproblem H v = lambda R v on the free dofs."""
    n_free = int(np.count_nonzero(~problem.boundary_mask))
    if n_free > config.DENSE_DIAGNOSTICS_MAX_DOF:
        raise DiagnosticsError(
            f"dense eigenproblem limited to {config.DENSE_DIAGNOSTICS_MAX_DOF} dofs, got {n_free}"
        )
    H_dense, R_dense = _free_block(problem, problem.eval_hessian(x))
    eigenvalues = scipy.linalg.eigh(0.5 * (H_dense + H_dense.T), R_dense, eigvals_only=True)
    return ConvexityBounds(
        hess_norm=float(np.max(np.abs(eigenvalues))), kappa1=float(eigenvalues[0])
    )


def lipschitz_factor(bounds: ConvexityBounds, tau: float, kappa2: float = 0.0) -> float:
    """(|H_x| - kappa1) / (2 (tau + kappa2))."""
    return (bounds.hess_norm - bounds.kappa1) / (2.0 * (tau + kappa2))


def gradient_mapping_bounds_check(
    problem: CompositeProblem,
    x: PrimalVector,
    omega: float,
    y: PrimalVector,
    z: PrimalVector,
    tight_tol: float = DEFAULT_TIGHT_TOL,
) -> bool:
    """Check tau(1 - c)|y - z| <= |G(y) - G(z)| <= tau(1 + c)|y - z| for the model's gradient mapping.

    tau = omega + (|H_x| + kappa1)/2 and c = (|H_x| - kappa1)/(2(tau + kappa2)), with
    kappa2 taken from the problem's convexity metadata (0 if unknown).
    """
    bounds = estimate_convexity(problem, x)
    kappa2 = problem.convexity.kappa2 or 0.0
    tau = omega + 0.5 * (bounds.hess_norm + bounds.kappa1)
    factor = lipschitz_factor(bounds, tau, kappa2)

    spec = SubproblemSpec(
        x=x,
        grad=problem.eval_grad_f(x),
        hess=problem.eval_hessian(x),
        omega=omega,
        problem=problem,
    )
    G_y = composite_gradient_mapping(
        problem, GradientMappingQuery(TargetKind.MODEL, tau, y, spec), tight_tol
    )
    G_z = composite_gradient_mapping(
        problem, GradientMappingQuery(TargetKind.MODEL, tau, z, spec), tight_tol
    )
    distance = primal_norm(problem.gram, y - z)
    difference = primal_norm(problem.gram, G_y - G_z)
    lower = tau * (1.0 - factor) * distance * (1.0 - BOUND_SLACK)
    upper = tau * (1.0 + factor) * distance * (1.0 + BOUND_SLACK)
    # tight solves carry an absolute error floor
    floor = 1e-9 * (1.0 + primal_norm(problem.gram, G_y) + primal_norm(problem.gram, G_z))
    return lower - floor <= difference <= upper + floor
