# ABOUTME: Solver-specific error interpretation that turns raw exceptions into readable messages with debug hints.
# ABOUTME: interpret_solver_error matches the proxnewton exception types plus I/O errors; format_error_with_hint composes the final message.
"""Interpret and enhance error messages with context-aware hints."""

from typing import Optional, Tuple

from proxnewton.errors.exceptions import (
    ContractViolation,
    EvaluationError,
    NonconvexCurvature,
    RunError,
    SolverError,
)


def interpret_solver_error(
    error: Exception,
    traceback_str: str,
    debug_mode: bool = False
) -> Tuple[str, Optional[str]]:
    """
    Interpret solver errors and provide helpful context.

    Args:
        error: The exception object
        traceback_str: Full traceback string
        debug_mode: Whether debug hints should be produced

    Returns:
        Tuple of (user_message, debug_hint)
        debug_hint is None if debug mode is OFF or no hint available
    """
    error_msg = str(error)

    # Pattern 1: rejection budget exhausted
    if isinstance(error, RunError):
        user_msg = f"Outer loop failed: {error_msg}"
        hint = None
        if debug_mode:
            record = error.last_record
            omega = getattr(record, "omega", None)
            hint = (
                f"Sufficient decrease kept failing (last omega={omega}). "
                "The model may be badly scaled; try a larger --omega0 or a smaller alpha/beta."
            )
        return user_msg, hint

    # Pattern 2: non-finite objective values
    if isinstance(error, EvaluationError):
        where = ""
        if error.element_index is not None:
            where = f" (element {error.element_index})"
        elif error.node_index is not None:
            where = f" (node {error.node_index})"
        user_msg = f"Non-finite value during evaluation{where}: {error_msg}"
        hint = None
        if debug_mode:
            hint = (
                "The rational beta-term or the max-term overflowed. "
                "Large trial steps cause this; a larger --omega0 damps the first steps."
            )
        return user_msg, hint

    # Pattern 3: nonconvexity escaped the outer loop
    if isinstance(error, NonconvexCurvature):
        user_msg = f"Subproblem is not convex: {error_msg}"
        hint = "Raise --omega0 so that H + omega R stays positive definite." if debug_mode else None
        return user_msg, hint

    # Pattern 4: factorization / norm failures
    if isinstance(error, SolverError):
        user_msg = f"Linear algebra failure: {error_msg}"
        hint = None
        if debug_mode:
            if "factoriz" in error_msg.lower() or "factoriz" in traceback_str.lower():
                hint = "The Gram matrix is not SPD. Check --norm and the Dirichlet mask."
            else:
                hint = "A squared norm came out negative; the Gram matrix may be ill-conditioned."
        return user_msg, hint

    # Pattern 5: bad parameters
    if isinstance(error, ContractViolation):
        user_msg = f"Invalid input: {error_msg}"
        hint = "Compare vector lengths with 3 * nodes of the grid." if debug_mode else None
        return user_msg, hint

    # Pattern 6: output directory problems
    if isinstance(error, OSError):
        user_msg = f"I/O error: {error_msg}"
        hint = "Check that --out points to a writable directory." if debug_mode else None
        return user_msg, hint

    # Default: return original message
    return error_msg, None


def format_error_with_hint(user_message: str, hint: Optional[str]) -> str:
    """
    Format error message with optional debug hint.

    Args:
        user_message: Main error message
        hint: Optional debug hint (shown when debug mode is ON)

    Returns:
        Formatted error message
    """
    if hint:
        return f"{user_message}\nHint: {hint}"
    return user_message
