# ABOUTME: Inexact solver for the regularized second-order subproblem: nonsmooth Gauss-Seidel, truncated linear correction, line search.
# ABOUTME: solve_subproblem iterates sweeps and corrections until the StoppingPolicy from criteria.py is satisfied.
"""Subproblem solver.

Minimizes the regularized decrease model

    lambda(d) = f'(x) d + 1/2 H(d, d) + omega/2 |d|_X^2 + g(x + d) - g(x)

by iterations of the form

1. one lexicographic sweep of exact scalar minimizations (soft-thresholding),
2. a linear correction on the coordinates that sit off the kinks of g,
   solved by Jacobi-preconditioned CG and damped by backtracking on lambda.

The corrections delta^i = Ds^i - Ds^{i-1} feed the contraction-rate
estimate theta used by the relative-error criterion.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from proxnewton import config
from proxnewton.core.criteria import CriteriaReport, StoppingMode, StoppingPolicy
from proxnewton.core.hilbert import BilinearForm, DualFunctional, PrimalVector, primal_norm
from proxnewton.core.problem import CompositeProblem
from proxnewton.errors.exceptions import ContractViolation, EvaluationError, NonconvexCurvature
from proxnewton.utils.logger import get_logger

logger = get_logger("subsolver")


@dataclass(frozen=True)
class SubsolverSettings:
    """Tuning knobs of the inner iteration (defaults from config.DEFAULT_SUBSOLVER)."""

    max_inner: int = config.DEFAULT_SUBSOLVER["max_inner"]
    cg_rtol: float = config.DEFAULT_SUBSOLVER["cg_rtol"]
    cg_maxiter: int = config.DEFAULT_SUBSOLVER["cg_maxiter"]
    kink_tol: float = config.DEFAULT_SUBSOLVER["kink_tol"]
    line_search_halvings: int = config.DEFAULT_SUBSOLVER["line_search_halvings"]
    theta_window: int = config.DEFAULT_SUBSOLVER["theta_window"]
    theta_min: float = config.DEFAULT_SUBSOLVER["theta_min"]
    theta_max: float = config.DEFAULT_SUBSOLVER["theta_max"]


DEFAULT_SETTINGS = SubsolverSettings()


class Termination(str, Enum):
    CRITERIA_SATISFIED = "criteria-satisfied"
    EXACT_TOLERANCE = "exact-tolerance"
    ITERATION_CAP = "iteration-cap"
    NONCONVEXITY = "nonconvexity-detected"


@dataclass(eq=False)
class SubproblemSpec:
    """Data of one subproblem: base point, f'(x), H_x, omega, and the problem (for g and R)."""

    x: PrimalVector
    grad: DualFunctional
    hess: BilinearForm
    omega: float
    problem: CompositeProblem

    def __post_init__(self):
        if self.omega < 0.0:
            raise ContractViolation(f"omega must be nonnegative, got {self.omega}")
        n = self.problem.num_dofs
        if self.x.size != n or self.grad.size != n or self.hess.shape != (n, n):
            raise ContractViolation("subproblem data dimensions do not match the problem")

    @cached_property
    def system_matrix(self) -> sp.csr_matrix:
        """H_x + omega R."""
        return sp.csr_matrix(self.hess + self.omega * self.problem.gram.matrix)

    @cached_property
    def g_at_x(self) -> float:
        return self.problem.eval_g(self.x)


@dataclass(frozen=True, eq=False)
class InnerState:
    """Inner iterate Ds^i with its correction history."""

    step: PrimalVector
    step_norm: float = 0.0
    last_correction_norm: Optional[float] = None
    correction_norm_history: Tuple[float, ...] = ()
    theta: Optional[float] = None
    model_value: float = 0.0
    iteration_count: int = 0
    # step at the start of the current iteration, set by the sweep
    sweep_origin: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass(eq=False)
class StepResult:
    """Outcome of one subproblem solve."""

    step: PrimalVector
    model_value: float
    inner_iterations: int
    criteria_report: Optional[CriteriaReport]
    terminated_by: Termination
    binding_criterion: str = "none"
    step_norm: float = 0.0


def _model_value(spec: SubproblemSpec, d: np.ndarray) -> float:
    A = spec.system_matrix
    w = spec.problem.l1_weights
    value = (
        spec.grad.coeffs @ d
        + 0.5 * d @ (A @ d)
        + w @ np.abs(spec.x.coeffs + d)
        - spec.g_at_x
    )
    if not np.isfinite(value):
        raise EvaluationError("non-finite model value")
    return float(value)


def eval_model(spec: SubproblemSpec, dx: PrimalVector) -> float:
    """lambda_{x,omega}(dx) = f'(x)dx + 1/2 H(dx,dx) + omega/2 |dx|^2 + g(x+dx) - g(x)."""
    if dx.size != spec.problem.num_dofs:
        raise ContractViolation(f"dimension mismatch: {dx.size} vs {spec.problem.num_dofs}")
    return _model_value(spec, dx.coeffs)


def scalar_prox(a: float, b: float, w: float, c0: float) -> float:
    """argmin_t 1/2 a t^2 + b t + w |c0 + t| by a shifted soft-threshold."""
    if not a > 0.0:
        raise NonconvexCurvature(f"nonpositive coordinate curvature {a:.3e}")
    z = a * c0 - b
    return float(np.sign(z) * max(abs(z) - w, 0.0) / a - c0)


def initial_state(spec: SubproblemSpec, start: Optional[PrimalVector] = None) -> InnerState:
    """Inner state at Ds^0 = start (zero by default)."""
    if start is None:
        return InnerState(step=PrimalVector.zeros(spec.problem.num_dofs))
    start = PrimalVector(np.where(spec.problem.boundary_mask, 0.0, start.coeffs))
    return InnerState(
        step=start,
        step_norm=primal_norm(spec.problem.gram, start),
        model_value=_model_value(spec, start.coeffs),
    )


def smoothing_sweep(spec: SubproblemSpec, state: InnerState) -> InnerState:
    """One forward Gauss-Seidel sweep of exact coordinate minimizations over the free dofs."""
    A = spec.system_matrix
    diag = A.diagonal()
    free = np.flatnonzero(~spec.problem.boundary_mask)
    if np.any(diag[free] <= 0.0):
        j = free[np.argmax(diag[free] <= 0.0)]
        raise NonconvexCurvature(f"nonpositive diagonal of H + omega R at dof {j}")

    indptr, indices, data = A.indptr, A.indices, A.data
    grad = spec.grad.coeffs
    x = spec.x.coeffs
    w = spec.problem.l1_weights
    d = state.step.coeffs.copy()
    Ad = A @ d
    for j in free:
        t = scalar_prox(diag[j], grad[j] + Ad[j], w[j], x[j] + d[j])
        if t != 0.0:
            d[j] += t
            lo, hi = indptr[j], indptr[j + 1]
            # A is symmetric, so row j doubles as column j
            Ad[indices[lo:hi]] += t * data[lo:hi]

    return replace(
        state,
        step=PrimalVector(d),
        model_value=_model_value(spec, d),
        sweep_origin=state.step.coeffs,
    )


def preconditioned_cg(
    A: sp.csr_matrix, b: np.ndarray, rtol: float, maxiter: int
) -> np.ndarray:
    """Jacobi-preconditioned CG from zero; stops at |r| <= rtol |b| or after maxiter steps."""
    x = np.zeros_like(b)
    b_norm = np.linalg.norm(b)
    if b_norm == 0.0:
        return x
    inv_diag = 1.0 / A.diagonal()
    r = b.copy()
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    for _ in range(maxiter):
        Ap = A @ p
        curvature = p @ Ap
        if curvature <= 0.0:
            raise NonconvexCurvature(f"CG met nonpositive curvature {curvature:.3e}")
        step = rz / curvature
        x += step * p
        r -= step * Ap
        if np.linalg.norm(r) <= rtol * b_norm:
            break
        z = inv_diag * r
        rz_next = r @ z
        p = z + (rz_next / rz) * p
        rz = rz_next
    return x


def estimate_theta(
    history: Sequence[float], settings: SubsolverSettings = DEFAULT_SETTINGS
) -> Optional[float]:
    """Geometric mean of the last correction-norm ratios, clipped; None before 3 corrections."""
    if len(history) < 3:
        return None
    tail = np.asarray(history[-(settings.theta_window + 1):], dtype=float)
    previous, current = tail[:-1], tail[1:]
    if np.any(previous <= 0.0):
        return settings.theta_min
    ratios = current / previous
    if np.any(ratios == 0.0):
        return settings.theta_min
    theta = float(np.exp(np.mean(np.log(ratios))))
    return float(np.clip(theta, settings.theta_min, settings.theta_max))


def truncated_correction(
    spec: SubproblemSpec, state: InnerState, settings: SubsolverSettings = DEFAULT_SETTINGS
) -> InnerState:
    """Linear correction on the dofs off the kinks of g, then backtracking on lambda.

    Records delta^i = Ds^i - Ds^{i-1} against the step at the start of the sweep.
    """
    if state.sweep_origin is None:
        raise ContractViolation("truncated_correction needs a smoothing sweep first")

    d = state.step.coeffs.copy()
    model_value = state.model_value
    y = spec.x.coeffs + d
    truncated = (np.abs(y) <= settings.kink_tol) | spec.problem.boundary_mask
    free = ~truncated

    if np.any(free):
        A = spec.system_matrix
        w = spec.problem.l1_weights
        # off the kinks g is linear, so the model is a quadratic there
        residual = -(spec.grad.coeffs + A @ d + w * np.sign(y))
        direction = np.zeros_like(d)
        direction[free] = preconditioned_cg(
            A[free][:, free], residual[free], settings.cg_rtol, settings.cg_maxiter
        )
        t = 1.0
        for _ in range(settings.line_search_halvings + 1):
            trial = d + t * direction
            trial_value = _model_value(spec, trial)
            if trial_value < model_value:
                d, model_value = trial, trial_value
                break
            t *= 0.5

    gram = spec.problem.gram
    correction_norm = primal_norm(gram, PrimalVector(d - state.sweep_origin))
    history = state.correction_norm_history + (correction_norm,)
    step = PrimalVector(d)
    return InnerState(
        step=step,
        step_norm=primal_norm(gram, step),
        last_correction_norm=correction_norm,
        correction_norm_history=history,
        theta=estimate_theta(history, settings),
        model_value=model_value,
        iteration_count=state.iteration_count + 1,
    )


def _binding_criterion(previous: Optional[CriteriaReport]) -> str:
    """Which inexactness test was still failing in ``previous``; None means no earlier iterate."""
    if previous is None:
        return "both"
    if previous.subgradient_ok and not previous.relative_ok:
        return "relative-error"
    if previous.relative_ok and not previous.subgradient_ok:
        return "subgradient"
    return "both"


def solve_subproblem(
    spec: SubproblemSpec,
    stop: StoppingPolicy,
    settings: SubsolverSettings = DEFAULT_SETTINGS,
    start: Optional[PrimalVector] = None,
) -> StepResult:
    """Iterate sweep + correction until ``stop`` is satisfied or max_inner iterations elapse.

    Nonconvexity is reported through ``terminated_by`` rather than raised, so
    the outer loop can raise omega and retry.
    """
    state = initial_state(spec, start)
    report: Optional[CriteriaReport] = None
    previous: Optional[CriteriaReport] = None
    terminated_by = Termination.ITERATION_CAP
    binding = "none"

    try:
        for _ in range(settings.max_inner):
            state = smoothing_sweep(spec, state)
            state = truncated_correction(spec, state, settings)
            previous, report = report, stop.assess(state)
            if report.satisfied:
                if stop.mode is not StoppingMode.INEXACT:
                    terminated_by = Termination.EXACT_TOLERANCE
                elif report.relative_ok and report.subgradient_ok:
                    terminated_by = Termination.CRITERIA_SATISFIED
                    binding = _binding_criterion(previous)
                else:
                    terminated_by = Termination.EXACT_TOLERANCE
                    binding = _binding_criterion(report)
                break
        else:
            logger.warning(
                f"Inner iteration cap {settings.max_inner} reached "
                f"(omega={spec.omega:.3e}, model_value={state.model_value:.3e})"
            )
    except NonconvexCurvature as e:
        logger.warning(f"Nonconvexity detected at omega={spec.omega:.3e}: {e}")
        terminated_by = Termination.NONCONVEXITY

    return StepResult(
        step=state.step,
        model_value=state.model_value,
        inner_iterations=state.iteration_count,
        criteria_report=report,
        terminated_by=terminated_by,
        binding_criterion=binding,
        step_norm=state.step_norm,
    )
