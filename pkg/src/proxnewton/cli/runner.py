# ABOUTME: Executes the (alpha, mode) runs of an experiment in worker processes and writes the CSV telemetry.
# ABOUTME: One run_<alpha>_<mode>.csv per run plus summary.csv; failed runs go to failures.log as RunFailure entries.
"""Experiment runner."""

import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, List, Optional

import pandas as pd

from proxnewton import config
from proxnewton.cli.main import EXIT_IO, EXIT_NOT_CONVERGED, EXIT_OK, ExperimentConfig
from proxnewton.core.outer import OuterConfig, RunReport, run
from proxnewton.core.problem import (
    CompositeProblem,
    ProblemParameters,
    assemble,
    random_quadratic_l1,
)
from proxnewton.diagnostics.stationarity import (
    GradientMappingQuery,
    TargetKind,
    gradient_mapping_norm,
)
from proxnewton.errors.error_interpretation import format_error_with_hint, interpret_solver_error
from proxnewton.errors.error_tracking import RunFailure
from proxnewton.utils.logger import get_logger, log_error
from proxnewton.utils.output_control import vprint

logger = get_logger("runner")

# Stationarity is reported for G_tau with this tau; it vanishes at critical points for any tau > 0
STATIONARITY_TAU = 1.0


@dataclass(frozen=True)
class RunJob:
    """One (alpha, mode) run; small and picklable so it can cross process boundaries."""

    experiment: ExperimentConfig
    alpha: float
    mode: str

    @property
    def label(self) -> str:
        return f"alpha={self.alpha:g} {self.mode}"

    @property
    def file_stem(self) -> Dict[str, str]:
        return {"alpha": f"{self.alpha:g}", "mode": self.mode}


@dataclass
class RunOutcome:
    job: RunJob
    summary_row: Optional[dict] = None
    converged: bool = False
    error_type: Optional[str] = None
    error_message: str = ""
    user_message: str = ""
    traceback_str: str = ""
    io_error: bool = False
    context: dict = field(default_factory=dict)


def build_problem(experiment: ExperimentConfig, alpha: float) -> CompositeProblem:
    """Problem instance of one run; alpha only affects the field problem."""
    if experiment.problem == "quadratic-l1":
        return random_quadratic_l1(experiment.size, seed=experiment.seed)
    params = ProblemParameters(
        dim=experiment.dim,
        nodes_per_axis=ProblemParameters.nodes_for_levels(experiment.levels),
        alpha=alpha,
        beta=experiment.beta,
        c=experiment.c,
        rho=experiment.rho,
        norm=experiment.norm,
        quadrature=experiment.quadrature,
    )
    return assemble(params)


def outer_config(experiment: ExperimentConfig, mode: str) -> OuterConfig:
    return OuterConfig(
        gamma=experiment.gamma,
        omega0=experiment.omega0,
        eta0=experiment.eta0,
        eps=experiment.eps,
        omega_tilde_max=experiment.omega_tilde_max,
        mode=mode,
        warm_start=experiment.warm_start,
        diagnostics=experiment.diagnostics,
    )


def records_frame(report: RunReport) -> pd.DataFrame:
    """Per-trial telemetry in the run CSV layout."""
    rows = [
        {
            "k": r.k,
            "omega": r.omega,
            "eta": r.eta,
            "corr_norm": r.correction_norm,
            "energy": r.energy,
            "inner_iters": r.inner_iterations,
            "accepted": int(r.accepted),
            "omega_tilde": r.omega_tilde,
            "E_est": r.E_est,
            "E_rel": r.E_rel,
        }
        for r in report.records
    ]
    return pd.DataFrame(rows, columns=config.RUN_COLUMNS)


def trace_frame(report: RunReport) -> pd.DataFrame:
    """Inner-iteration criteria reports of every trial step."""
    rows = [
        {
            "k": entry.k,
            "trial": entry.trial,
            "inner": entry.report.iteration,
            "E_est": entry.report.E_est,
            "E_rel": entry.report.E_rel,
            "eta": entry.report.eta,
            "omega_tilde": entry.report.omega_tilde,
            "model_value": entry.report.model_value,
        }
        for entry in report.trace
    ]
    return pd.DataFrame(rows, columns=config.TRACE_COLUMNS)


def _write_csv(frame: pd.DataFrame, path) -> None:
    frame.to_csv(path, index=False, na_rep="")


def execute_run(job: RunJob) -> RunOutcome:
    """Run one (alpha, mode) pair and write its CSV files; exceptions are captured, not raised."""
    experiment = job.experiment
    outcome = RunOutcome(job=job)
    try:
        problem = build_problem(experiment, job.alpha)
        report = run(problem, outer_config(experiment, job.mode))
    except Exception as e:
        user_msg, hint = interpret_solver_error(e, traceback.format_exc(), experiment.debug)
        outcome.error_type = type(e).__name__
        outcome.error_message = str(e)
        outcome.user_message = format_error_with_hint(user_msg, hint)
        outcome.traceback_str = traceback.format_exc()
        last_record = getattr(e, "last_record", None)
        if last_record is not None:
            outcome.context = {"last_record": repr(last_record)}
        log_error(f"Run {job.label} failed: {outcome.user_message}")
        return outcome

    summary_row = {
        "alpha": job.alpha,
        "mode": job.mode,
        "accepted": report.accepted,
        "declined": report.declined,
        "total_inner_iters": report.total_inner_iterations,
    }
    try:
        if experiment.diagnostics:
            query = GradientMappingQuery(TargetKind.OBJECTIVE, STATIONARITY_TAU, report.final_iterate)
            summary_row["grad_map_norm"] = gradient_mapping_norm(problem, query)
    except Exception as e:
        logger.warning(f"Stationarity diagnostic failed for {job.label}: {e}")
        summary_row["grad_map_norm"] = None

    try:
        _write_csv(records_frame(report), experiment.out / config.RUN_FILE_TEMPLATE.format(**job.file_stem))
        if experiment.diagnostics:
            _write_csv(
                trace_frame(report), experiment.out / config.TRACE_FILE_TEMPLATE.format(**job.file_stem)
            )
    except OSError as e:
        outcome.io_error = True
        outcome.error_type = type(e).__name__
        outcome.error_message = str(e)
        outcome.user_message = format_error_with_hint(
            *interpret_solver_error(e, traceback.format_exc(), experiment.debug)
        )
        outcome.traceback_str = traceback.format_exc()
        log_error(f"Writing results of {job.label} failed: {e}")
        return outcome

    outcome.summary_row = summary_row
    outcome.converged = report.converged
    logger.info(
        f"Run {job.label}: {report.termination_reason.value}, accepted={report.accepted}, "
        f"declined={report.declined}, inner={report.total_inner_iterations}"
    )
    return outcome


def plan_jobs(experiment: ExperimentConfig) -> List[RunJob]:
    if experiment.problem == "quadratic-l1" and len(experiment.alpha) > 1:
        logger.warning("alpha has no effect on the quadratic-l1 problem; runs will repeat")
    return [
        RunJob(experiment=experiment, alpha=alpha, mode=mode)
        for alpha in experiment.alpha
        for mode in experiment.modes
    ]


def _execute_all(jobs: List[RunJob], workers: int) -> List[RunOutcome]:
    if workers <= 1 or len(jobs) <= 1:
        return [execute_run(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(execute_run, jobs))


def write_failures(outcomes: List[RunOutcome], path) -> List[RunFailure]:
    """Write failures.log; nothing is written when every run succeeded."""
    failures = [
        RunFailure(
            error_id=i,
            timestamp=datetime.now(),
            run_label=o.job.label,
            error_type=o.error_type,
            error_message=o.error_message,
            full_traceback=o.traceback_str,
            user_facing_message=o.user_message,
            context=o.context or None,
        )
        for i, o in enumerate((o for o in outcomes if o.error_type is not None), start=1)
    ]
    if failures:
        text = "\n\n".join(f.summary() + "\n" + f.detailed() for f in failures)
        path.write_text(text + "\n")
    return failures


def run_experiment(experiment: ExperimentConfig, workers: Optional[int] = None) -> int:
    """
    Run every (alpha, mode) pair and write the CSV outputs.

    Returns:
        0 when every run stopped by its stopping test, 1 when a run failed or hit
        max_outer, 3 when the output files could not be written
    """
    jobs = plan_jobs(experiment)
    vprint(f"[RUN] {len(jobs)} runs in {experiment.out}")
    outcomes = _execute_all(jobs, config.MAX_WORKERS if workers is None else workers)

    summary_columns = list(config.SUMMARY_COLUMNS)
    if experiment.diagnostics:
        summary_columns.append("grad_map_norm")
    rows = [o.summary_row for o in outcomes if o.summary_row is not None]

    try:
        _write_csv(
            pd.DataFrame(rows, columns=summary_columns), experiment.out / config.SUMMARY_FILE_NAME
        )
        failures = write_failures(outcomes, experiment.out / config.FAILURES_FILE_NAME)
    except OSError as e:
        log_error(f"Writing the experiment summary failed: {e}")
        vprint(f"I/O error: {e}", force=True)
        return EXIT_IO

    for failure in failures:
        vprint(failure.user_facing_message, force=True)
    for o in outcomes:
        status = "converged" if o.converged else "FAILED" if o.error_type else "not converged"
        vprint(f"[RUN] {o.job.label}: {status}")

    if any(o.io_error for o in outcomes):
        return EXIT_IO
    if all(o.converged for o in outcomes):
        return EXIT_OK
    return EXIT_NOT_CONVERGED
