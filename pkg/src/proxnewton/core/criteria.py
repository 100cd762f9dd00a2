# ABOUTME: Inexactness criteria for the inner solve (relative-error estimate, subgradient test) and the sufficient-decrease test.
# ABOUTME: make_stopping_policy packages them as a StoppingPolicy that the subsolver consults after every inner iteration.
"""Inexactness and acceptance criteria.

Relative-error estimate: with a linear inner rate theta and the latest
correction delta^i, the error of the inner iterate Ds^i against the exact
step is bounded by

    E_est = (theta/(1-theta) |delta^i|) / (|Ds^i| - theta/(1-theta) |delta^i|)

Subgradient criterion: the model decrease lambda must beat the decrease of a
plain subgradient step with regularization omega_tilde,

    omega_tilde = -|f'(x) + mu|^2_{X*} / (2 lambda) < omega_tilde_max.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from proxnewton import config
from proxnewton.core.hilbert import (
    DualFunctional,
    GramOperator,
    PrimalVector,
    checked_sqrt,
    primal_norm,
    riesz_inverse,
)
from proxnewton.errors.exceptions import ContractViolation


@dataclass(frozen=True)
class CriteriaReport:
    """Criteria evaluated at one inner iterate.

    Attributes:
        iteration: Inner iteration index (1-based)
        E_est: Relative-error estimate, None while theta is undefined
        eta: Forcing term in effect
        omega_tilde: Subgradient-criterion parameter, None while lambda >= 0
        omega_tilde_max: Upper bound for omega_tilde
        dual_norm_sq: |f'(x) + mu|^2 in X*
        model_value: lambda at the inner iterate
        relative_ok: E_est <= eta
        subgradient_ok: lambda < 0 and omega_tilde < omega_tilde_max
        exact_ok: the inner solve has converged to working precision
        satisfied: the policy's verdict
        E_rel: True relative error (diagnostic runs with a reference step only)
    """

    iteration: int
    E_est: Optional[float]
    eta: float
    omega_tilde: Optional[float]
    omega_tilde_max: float
    dual_norm_sq: float
    model_value: float
    relative_ok: bool
    subgradient_ok: bool
    exact_ok: bool
    satisfied: bool
    E_rel: Optional[float] = None


def relative_error_estimate(
    delta_norm: float, step_norm: float, theta: Optional[float]
) -> Optional[float]:
    """Upper bound for |Dx - Ds^i| / |Dx| from the inner contraction rate; None if unusable."""
    if theta is None:
        return None
    if not 0.0 < theta < 1.0:
        raise ContractViolation(f"theta must lie in (0, 1), got {theta}")
    tail = theta / (1.0 - theta) * delta_norm
    denominator = step_norm - tail
    if denominator <= 0.0:
        return None
    return tail / denominator


def subgradient_criterion(
    dual_norm_sq: float, model_value: float, omega_tilde_max: float
) -> Tuple[Optional[float], bool]:
    """Return (omega_tilde, satisfied); no descent yet means (None, False)."""
    if dual_norm_sq < 0.0:
        raise ContractViolation(f"dual_norm_sq must be nonnegative, got {dual_norm_sq}")
    if model_value >= 0.0:
        return None, False
    omega_tilde = -dual_norm_sq / (2.0 * model_value)
    return omega_tilde, omega_tilde < omega_tilde_max


def dual_norm_of_residual(
    problem, x: PrimalVector, grad_f: DualFunctional, mu: DualFunctional
) -> float:
    """|f'(x) + mu|_{X*}, evaluated at the minimizer of the linear subgradient model.

    The subgradient step with unit regularization is Dx_mu = -R^{-1}(f'(x) + mu);
    the functional applied there gives -|f'(x) + mu|^2_{X*}.
    """
    ell = grad_f + mu
    step = -riesz_inverse(problem.gram, ell)
    value = -ell(step)
    return checked_sqrt(value, float(np.abs(ell.coeffs) @ np.abs(step.coeffs)))


def sufficient_decrease(F_new: float, F_old: float, model_value: float, gamma: float) -> bool:
    """Acceptance test F_new - F_old <= gamma * lambda."""
    if not 0.0 < gamma < 1.0:
        raise ContractViolation(f"gamma must lie in (0, 1), got {gamma}")
    return F_new - F_old <= gamma * model_value


class StoppingMode(str, Enum):
    INEXACT = "inexact"
    EXACT = "exact"
    TIGHT = "tight"


@dataclass
class StoppingPolicy:
    """Inner-solve termination rule; every assessed iterate is appended to ``reports``.

    inexact: relative-error estimate and subgradient criterion both hold, or
        the inner solve has already converged (exact_ok).
    exact: |delta^i| <= 1e-14 (1 + |Ds^i|) or E_est <= 1e-12.
    tight: |delta^i| <= tight_tol (1 + |Ds^i|).
    """

    mode: StoppingMode
    eta: float = config.DEFAULT_OUTER["eta0"]
    omega_tilde_max: float = config.DEFAULT_OUTER["omega_tilde_max"]
    dual_norm_sq: float = 0.0
    tight_tol: float = 1e-12
    exact_correction_tol: float = config.DEFAULT_SUBSOLVER["exact_correction_tol"]
    exact_estimate_tol: float = config.DEFAULT_SUBSOLVER["exact_estimate_tol"]
    reference: Optional[PrimalVector] = None
    gram: Optional[GramOperator] = None
    reports: List[CriteriaReport] = field(default_factory=list)

    def _true_relative_error(self, step: PrimalVector) -> Optional[float]:
        if self.reference is None or self.gram is None:
            return None
        ref_norm = primal_norm(self.gram, self.reference)
        if ref_norm == 0.0:
            return None
        return primal_norm(self.gram, self.reference - step) / ref_norm

    def assess(self, state) -> CriteriaReport:
        """Evaluate the criteria at an inner state and record the report."""
        delta = state.last_correction_norm
        E_est = relative_error_estimate(delta, state.step_norm, state.theta)
        relative_ok = E_est is not None and E_est <= self.eta
        omega_tilde, subgradient_ok = subgradient_criterion(
            self.dual_norm_sq, state.model_value, self.omega_tilde_max
        )
        converged = delta <= self.exact_correction_tol * (1.0 + state.step_norm)
        exact_ok = converged or (E_est is not None and E_est <= self.exact_estimate_tol)

        if self.mode is StoppingMode.INEXACT:
            satisfied = (relative_ok and subgradient_ok) or exact_ok
        elif self.mode is StoppingMode.EXACT:
            satisfied = exact_ok
        else:
            satisfied = delta <= self.tight_tol * (1.0 + state.step_norm)

        report = CriteriaReport(
            iteration=state.iteration_count,
            E_est=E_est,
            eta=self.eta,
            omega_tilde=omega_tilde,
            omega_tilde_max=self.omega_tilde_max,
            dual_norm_sq=self.dual_norm_sq,
            model_value=state.model_value,
            relative_ok=relative_ok,
            subgradient_ok=subgradient_ok,
            exact_ok=exact_ok,
            satisfied=satisfied,
            E_rel=self._true_relative_error(state.step),
        )
        self.reports.append(report)
        return report


def make_stopping_policy(
    mode: StoppingMode | str,
    omega_tilde_max: float = config.DEFAULT_OUTER["omega_tilde_max"],
    reports: Optional[List[CriteriaReport]] = None,
    eta: float = config.DEFAULT_OUTER["eta0"],
    dual_norm_sq: float = 0.0,
    tight_tol: float = 1e-12,
    reference: Optional[PrimalVector] = None,
    gram: Optional[GramOperator] = None,
) -> StoppingPolicy:
    """Build the stopping rule for one subproblem solve.

    Args:
        mode: "inexact", "exact" or "tight"
        omega_tilde_max: Bound of the subgradient criterion (> 0)
        reports: Caller-owned list receiving every CriteriaReport
        eta: Forcing term for the inexact mode, in [0, 1)
        dual_norm_sq: |f'(x) + mu|^2 in X*, fixed for the outer iteration
        tight_tol: Relative correction tolerance of the tight mode
        reference: Exactly solved step; enables E_rel in the reports
        gram: Gram operator used to measure E_rel
    """
    mode = StoppingMode(mode)
    if not 0.0 <= eta < 1.0:
        raise ContractViolation(f"eta must lie in [0, 1), got {eta}")
    if omega_tilde_max <= 0.0:
        raise ContractViolation(f"omega_tilde_max must be positive, got {omega_tilde_max}")
    return StoppingPolicy(
        mode=mode,
        eta=eta,
        omega_tilde_max=omega_tilde_max,
        dual_norm_sq=dual_norm_sq,
        tight_tol=tight_tol,
        reference=reference,
        gram=gram,
        reports=reports if reports is not None else [],
    )
