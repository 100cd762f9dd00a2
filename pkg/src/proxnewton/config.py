# ABOUTME: Configuration constants for paths, worker slots, and numerical defaults.
# ABOUTME: Imported as `from proxnewton import config`; PROXNEWTON_LOG_DIR / PROXNEWTON_THREADS env vars override defaults.
"""Configuration for proxnewton"""
import os
from pathlib import Path

# Paths
# config.py is in src/proxnewton/, need to go up 3 levels to project root
PACKAGE_ROOT = Path(__file__).parent.parent.parent
PROJECT_ROOT = PACKAGE_ROOT
LOG_DIR = Path(os.getenv("PROXNEWTON_LOG_DIR", str(PROJECT_ROOT / "logs")))

# Ensure directories exist
LOG_DIR.mkdir(parents=True, exist_ok=True)

# Output file naming
RESOLVED_CONFIG_NAME = "config.resolved"
SUMMARY_FILE_NAME = "summary.csv"
FAILURES_FILE_NAME = "failures.log"
RUN_FILE_TEMPLATE = "run_{alpha}_{mode}.csv"
TRACE_FILE_TEMPLATE = "trace_{alpha}_{mode}.csv"

RUN_COLUMNS = [
    "k", "omega", "eta", "corr_norm", "energy", "inner_iters",
    "accepted", "omega_tilde", "E_est", "E_rel",
]
SUMMARY_COLUMNS = ["alpha", "mode", "accepted", "declined", "total_inner_iters"]
TRACE_COLUMNS = ["k", "trial", "inner", "E_est", "E_rel", "eta", "omega_tilde", "model_value"]


def _read_worker_slots(raw: str | None) -> int:
    """Parse PROXNEWTON_THREADS; anything that is not a positive integer means 1."""
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(value, 1)


# Worker slots for independent (alpha, mode) runs
THREADS_ENV_VAR = "PROXNEWTON_THREADS"
MAX_WORKERS = _read_worker_slots(os.getenv(THREADS_ENV_VAR))

# Problem defaults
# Base grid is 5 nodes per axis; each refinement level halves the mesh width
BASE_NODES_PER_AXIS = 5
DEFAULT_PROBLEM = {
    "dim": 2,
    "levels": 2,
    "alpha": 40.0,
    "beta": 40.0,
    "c": 80.0,
    "rho": -100.0,
    "norm": "h1",
    "quadrature": "gauss",
}

# Outer loop defaults (schedule shapes are fixed, starting values are ours)
DEFAULT_OUTER = {
    "gamma": 0.5,
    "omega0": 1.0,
    "eta0": 0.9,
    "eps": 1e-9,
    "lambda_stop": 1e-13,
    "omega_tilde_max": 1e8,
    "omega_zero_threshold": 1e-8,
    "omega_reset": 1e-4,
    "eta_floor": 1e-12,
    "max_outer": 200,
    "max_rejections_per_step": 60,
}

# Inner solver defaults
DEFAULT_SUBSOLVER = {
    "max_inner": 200,
    "cg_rtol": 1e-2,
    "cg_maxiter": 200,
    "kink_tol": 1e-12,
    "line_search_halvings": 20,
    "theta_window": 3,
    "theta_min": 0.05,
    "theta_max": 0.95,
    "exact_correction_tol": 1e-14,
    "exact_estimate_tol": 1e-12,
}

# Tolerances shared by the Hilbert-space layer
NEGATIVE_RADICAND_TOL = 1e-14
DENSE_DIAGNOSTICS_MAX_DOF = 200
