# ABOUTME: File-based logging setup writing to LOG_DIR/proxnewton.log.
# ABOUTME: Provides log_run_start / log_outer_step / log_inner_result / log_error helpers; console output is handled separately by vprint.
"""Logging utilities for solver runs."""
import logging
from proxnewton import config

# Configure logging (LOG_DIR already created in config.py)
# Only log to file - console output is controlled by vprint() and verbose mode
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler(config.LOG_DIR / "proxnewton.log")
    ]
)

logger = logging.getLogger("proxnewton")


def get_logger(component: str) -> logging.Logger:
    """Child logger for a solver component, e.g. 'subsolver'."""
    return logger.getChild(component)


def log_run_start(label: str, settings: dict):
    """Log the start of a solver run."""
    logger.info(f"Run start: {label} with settings {settings}")


def log_outer_step(record):
    """Log one outer iteration record."""
    status = "accepted" if record.accepted else "declined"
    logger.info(
        f"Outer step k={record.k} {status}: omega={record.omega:.3e} eta={record.eta:.3e} "
        f"corr_norm={record.correction_norm:.3e} energy={record.energy:.12e} "
        f"inner={record.inner_iterations}"
    )


def log_inner_result(result):
    """Log the outcome of one subproblem solve."""
    logger.info(
        f"Inner solve: {result.inner_iterations} iterations, "
        f"terminated_by={result.terminated_by.value}, model_value={result.model_value:.6e}"
    )


def log_error(error_msg: str):
    """Log an error."""
    logger.error(error_msg)
