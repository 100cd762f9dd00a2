# ABOUTME: Outer proximal Newton loop: trial steps, sufficient-decrease acceptance, omega/eta schedules, stopping, telemetry.
# ABOUTME: run(problem, OuterConfig) returns a RunReport with one IterationRecord per trial step that did not end the run in place.
"""Globalized inexact proximal Newton iteration.

Each outer iteration computes trial steps at x_k for increasing omega until
one passes the sufficient-decrease test. Rejections double omega; acceptances
shrink omega by (1/2)^(n*n) with n consecutive successes, and shrink eta by 0.6.
Only steps with negative model value can be accepted.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from proxnewton.config import DEFAULT_OUTER
from proxnewton.core.criteria import (
    CriteriaReport,
    StoppingMode,
    dual_norm_of_residual,
    make_stopping_policy,
    sufficient_decrease,
)
from proxnewton.core.hilbert import PrimalVector
from proxnewton.core.problem import CompositeProblem, eval_F, min_norm_subgradient
from proxnewton.core.subsolver import (
    DEFAULT_SETTINGS,
    StepResult,
    SubproblemSpec,
    SubsolverSettings,
    Termination,
    solve_subproblem,
)
from proxnewton.errors.exceptions import ContractViolation, EvaluationError, RunError
from proxnewton.utils.logger import get_logger, log_inner_result, log_outer_step, log_run_start

logger = get_logger("outer")

_D = DEFAULT_OUTER


@dataclass(frozen=True)
class OuterConfig:
    """Parameters of the outer loop.

    Attributes:
        gamma: Sufficient-decrease parameter in (0, 1)
        omega0: Initial regularization
        eta0: Initial forcing term in (0, 1)
        eps: Stop when (1 + omega) |Ds| < eps
        lambda_stop: Stop when (1 + omega) |lambda| < lambda_stop
        omega_tilde_max: Bound of the subgradient criterion
        omega_zero_threshold: omega below this value is set to 0
        omega_reset: Restart value when a step at omega = 0 is rejected
        eta_floor: Lower bound of the forcing term
        max_outer: Maximal number of outer iterations
        max_rejections_per_step: Consecutive rejections tolerated at one x_k
        mode: "inexact" (both criteria) or "exact" (tight inner solves)
        warm_start: Start rejected retries from the previous trial step
        diagnostics: Solve every subproblem a second time exactly to record E_rel
    """

    gamma: float = _D["gamma"]
    omega0: float = _D["omega0"]
    eta0: float = _D["eta0"]
    eps: float = _D["eps"]
    lambda_stop: float = _D["lambda_stop"]
    omega_tilde_max: float = _D["omega_tilde_max"]
    omega_zero_threshold: float = _D["omega_zero_threshold"]
    omega_reset: float = _D["omega_reset"]
    eta_floor: float = _D["eta_floor"]
    max_outer: int = _D["max_outer"]
    max_rejections_per_step: int = _D["max_rejections_per_step"]
    mode: str = "inexact"
    warm_start: bool = False
    diagnostics: bool = False
    subsolver: SubsolverSettings = DEFAULT_SETTINGS

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ContractViolation(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.omega0 < 0.0:
            raise ContractViolation(f"omega0 must be nonnegative, got {self.omega0}")
        if not 0.0 < self.eta0 < 1.0:
            raise ContractViolation(f"eta0 must lie in (0, 1), got {self.eta0}")
        positive = {
            "eps": self.eps,
            "lambda_stop": self.lambda_stop,
            "omega_tilde_max": self.omega_tilde_max,
            "omega_zero_threshold": self.omega_zero_threshold,
            "omega_reset": self.omega_reset,
            "eta_floor": self.eta_floor,
            "max_outer": self.max_outer,
            "max_rejections_per_step": self.max_rejections_per_step,
        }
        for name, value in positive.items():
            if not value > 0:
                raise ContractViolation(f"{name} must be positive, got {value}")
        if self.mode not in (StoppingMode.INEXACT.value, StoppingMode.EXACT.value):
            raise ContractViolation(f"mode must be 'inexact' or 'exact', got '{self.mode}'")

    def as_dict(self) -> dict:
        settings = asdict(self)
        settings.pop("subsolver")
        return settings


@dataclass(frozen=True)
class IterationRecord:
    """Telemetry of one trial step.

    ``energy`` is F at the trial point x_k + Ds (NaN if it could not be
    evaluated); for accepted records this is the new iterate's energy.
    """

    k: int
    trial: int
    omega: float
    eta: float
    correction_norm: float
    energy: float
    inner_iterations: int
    accepted: bool
    consecutive_successes: int
    model_value: float
    omega_tilde: Optional[float] = None
    E_est: Optional[float] = None
    E_rel: Optional[float] = None
    binding_criterion: str = "none"
    terminated_by: str = Termination.CRITERIA_SATISFIED.value


class TerminationReason(str, Enum):
    CORRECTION_NORM = "correction-norm"
    MODEL_VALUE = "model-value"
    MAX_OUTER = "max-outer"


@dataclass
class TraceEntry:
    """One inner-iteration report tagged with its outer iteration and trial."""

    k: int
    trial: int
    report: CriteriaReport


@dataclass
class RunReport:
    records: List[IterationRecord]
    final_iterate: PrimalVector
    termination_reason: TerminationReason
    initial_energy: float
    trace: List[TraceEntry] = field(default_factory=list)

    @property
    def accepted(self) -> int:
        return sum(r.accepted for r in self.records)

    @property
    def declined(self) -> int:
        return sum(not r.accepted for r in self.records)

    @property
    def total_inner_iterations(self) -> int:
        return sum(r.inner_iterations for r in self.records)

    @property
    def converged(self) -> bool:
        return self.termination_reason is not TerminationReason.MAX_OUTER

    @property
    def final_energy(self) -> float:
        accepted = [r.energy for r in self.records if r.accepted]
        return accepted[-1] if accepted else self.initial_energy


def update_omega_on_accept(omega: float, n: int, threshold: float = _D["omega_zero_threshold"]) -> float:
    """omega * (1/2)^(n*n), snapped to zero below ``threshold``."""
    if omega < 0.0:
        raise ContractViolation(f"omega must be nonnegative, got {omega}")
    if n < 1:
        raise ContractViolation(f"consecutive successes must be >= 1, got {n}")
    updated = omega * 0.5 ** (n * n)
    return 0.0 if updated < threshold else updated


def update_omega_on_reject(omega: float, omega_reset: float = _D["omega_reset"]) -> float:
    """Double omega; a rejected step at omega = 0 restarts from ``omega_reset``."""
    if omega < 0.0:
        raise ContractViolation(f"omega must be nonnegative, got {omega}")
    return 2.0 * omega if omega > 0.0 else omega_reset


def update_eta_on_accept(eta: float, floor: float = _D["eta_floor"]) -> float:
    return max(0.6 * eta, floor)


def stopping_check(
    omega: float,
    step_norm: float,
    model_value: float,
    eps: float = _D["eps"],
    lambda_stop: float = _D["lambda_stop"],
) -> Optional[TerminationReason]:
    """Termination reason for the latest trial step, or None to continue."""
    scale = 1.0 + omega
    if scale * step_norm < eps:
        return TerminationReason.CORRECTION_NORM
    if scale * abs(model_value) < lambda_stop:
        return TerminationReason.MODEL_VALUE
    return None


@dataclass
class _OuterState:
    x: PrimalVector
    energy: float
    omega: float
    eta: float
    n: int = 0


def _reference_step(spec: SubproblemSpec, config: OuterConfig) -> PrimalVector:
    """Exactly solved step used to measure E_rel in diagnostic runs."""
    policy = make_stopping_policy(StoppingMode.EXACT, config.omega_tilde_max)
    return solve_subproblem(spec, policy, config.subsolver).step


def _trial_step(
    problem: CompositeProblem,
    state: _OuterState,
    grad,
    hess,
    dual_norm_sq: float,
    config: OuterConfig,
    reports: List[CriteriaReport],
    start: Optional[PrimalVector],
) -> Tuple[StepResult, SubproblemSpec]:
    spec = SubproblemSpec(x=state.x, grad=grad, hess=hess, omega=state.omega, problem=problem)
    reference = None
    if config.diagnostics:
        reference = _reference_step(spec, config)
    policy = make_stopping_policy(
        config.mode,
        omega_tilde_max=config.omega_tilde_max,
        reports=reports,
        eta=state.eta,
        dual_norm_sq=dual_norm_sq,
        reference=reference,
        gram=problem.gram,
    )
    result = solve_subproblem(spec, policy, config.subsolver, start=start)
    log_inner_result(result)
    return result, spec


def run(problem: CompositeProblem, config: OuterConfig = OuterConfig()) -> RunReport:
    """Run the globalized proximal Newton method from x_0 = 0.

    Raises:
        RunError: no acceptable step within max_rejections_per_step trials
    """
    log_run_start(type(problem).__name__, config.as_dict())
    x0 = PrimalVector.zeros(problem.num_dofs)
    state = _OuterState(
        x=x0, energy=eval_F(problem, x0).F_value, omega=config.omega0, eta=config.eta0
    )
    initial_energy = state.energy
    records: List[IterationRecord] = []
    trace: List[TraceEntry] = []
    reason = TerminationReason.MAX_OUTER

    for k in range(config.max_outer):
        grad = problem.eval_grad_f(state.x)
        mu = min_norm_subgradient(problem, state.x, grad)
        dual_norm_sq = dual_norm_of_residual(problem, state.x, grad, mu) ** 2
        hess = problem.eval_hessian(state.x)

        stop: Optional[TerminationReason] = None
        start: Optional[PrimalVector] = None
        for trial in range(config.max_rejections_per_step + 1):
            reports: List[CriteriaReport] = []
            result, spec = _trial_step(
                problem, state, grad, hess, dual_norm_sq, config, reports, start
            )
            trace.extend(TraceEntry(k=k, trial=trial, report=r) for r in reports)

            solved = result.terminated_by is not Termination.NONCONVEXITY
            descent = solved and result.model_value < 0.0
            step_omega, step_eta = state.omega, state.eta
            if solved:
                stop = stopping_check(
                    step_omega, result.step_norm, result.model_value,
                    config.eps, config.lambda_stop,
                )
            energy = float("nan")
            accepted = False
            if descent:
                trial_point = state.x + result.step
                try:
                    energy = eval_F(problem, trial_point).F_value
                    accepted = sufficient_decrease(
                        energy, state.energy, result.model_value, config.gamma
                    )
                except EvaluationError as e:
                    logger.warning(f"Trial point not evaluable at k={k}, omega={state.omega:.3e}: {e}")

            if stop is not None and not accepted:
                # converged in place: x_k is kept, the trial is not a step
                logger.info(
                    f"Stopping at k={k} on a non-decreasing trial "
                    f"(lambda={result.model_value:.3e}, |ds|={result.step_norm:.3e})"
                )
                break

            if accepted:
                state.x = trial_point
                state.energy = energy
                state.n += 1
                state.omega = update_omega_on_accept(
                    state.omega, state.n, config.omega_zero_threshold
                )
                state.eta = update_eta_on_accept(state.eta, config.eta_floor)
            else:
                state.n = 0
                state.omega = update_omega_on_reject(state.omega, config.omega_reset)
                start = result.step if config.warm_start and descent else None

            report = result.criteria_report
            record = IterationRecord(
                k=k,
                trial=trial,
                omega=step_omega,
                eta=step_eta,
                correction_norm=result.step_norm,
                energy=energy,
                inner_iterations=result.inner_iterations,
                accepted=accepted,
                consecutive_successes=state.n,
                model_value=result.model_value,
                omega_tilde=report.omega_tilde if report else None,
                E_est=report.E_est if report else None,
                E_rel=report.E_rel if report else None,
                binding_criterion=result.binding_criterion,
                terminated_by=result.terminated_by.value,
            )
            records.append(record)
            log_outer_step(record)

            if accepted:
                break
            logger.warning(
                f"Step declined at k={k} (trial {trial}); omega raised to {state.omega:.3e}"
            )
        else:
            raise RunError(
                f"no acceptable step after {config.max_rejections_per_step} rejections "
                f"at outer iteration {k}",
                last_record=records[-1],
            )

        if stop is not None:
            reason = stop
            break

    logger.info(
        f"Run finished: reason={reason.value}, accepted={sum(r.accepted for r in records)}, "
        f"energy={state.energy:.12e}"
    )
    return RunReport(
        records=records,
        final_iterate=state.x,
        termination_reason=reason,
        initial_energy=initial_energy,
        trace=trace,
    )
