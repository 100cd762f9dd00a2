# ABOUTME: Unit tests for the error-pattern matchers in errors/error_interpretation.py.
# ABOUTME: Checks message rewrites and debug hints for each proxnewton exception type.
"""Unit tests for error interpretation."""

from types import SimpleNamespace

import pytest

from proxnewton.errors.error_interpretation import format_error_with_hint, interpret_solver_error
from proxnewton.errors.exceptions import (
    ContractViolation,
    EvaluationError,
    NonconvexCurvature,
    RunError,
    SolverError,
)


def test_run_error_no_debug():
    """Test the RunError message without --debug."""
    error = RunError("no acceptable step", last_record=SimpleNamespace(omega=64.0))

    user_msg, hint = interpret_solver_error(error, "", debug_mode=False)

    assert "Outer loop failed" in user_msg
    assert hint is None


def test_run_error_with_debug():
    """Test that the RunError hint names the last omega."""
    error = RunError("no acceptable step", last_record=SimpleNamespace(omega=64.0))

    _, hint = interpret_solver_error(error, "", debug_mode=True)

    assert "omega=64.0" in hint


def test_evaluation_error_names_element():
    """Test that a Gauss-quadrature overflow is reported by element."""
    user_msg, _ = interpret_solver_error(EvaluationError("overflow", element_index=12), "")
    assert "element 12" in user_msg


def test_evaluation_error_names_node():
    """Test that a lumped nodal overflow is reported by node."""
    user_msg, _ = interpret_solver_error(EvaluationError("overflow", node_index=7), "")
    assert "node 7" in user_msg


def test_nonconvexity_hint():
    """Test the message and hint for nonconvex curvature."""
    user_msg, hint = interpret_solver_error(NonconvexCurvature("pAp < 0"), "", debug_mode=True)
    assert "not convex" in user_msg
    assert "--omega0" in hint


@pytest.mark.parametrize(
    "message,traceback,expected",
    [
        ("Cholesky factorization failed", "", "not SPD"),
        ("negative radicand -1e-3", "", "ill-conditioned"),
    ],
)
def test_solver_error_hints(message, traceback, expected):
    """Test the hints for linear algebra failures."""
    _, hint = interpret_solver_error(SolverError(message), traceback, debug_mode=True)
    assert expected in hint


def test_contract_violation():
    """Test that contract violations are reported as invalid input."""
    user_msg, hint = interpret_solver_error(ContractViolation("dimension mismatch"), "")
    assert user_msg.startswith("Invalid input")
    assert hint is None


def test_os_error():
    """Test the message and hint for I/O errors."""
    user_msg, hint = interpret_solver_error(PermissionError("denied"), "", debug_mode=True)
    assert "I/O error" in user_msg
    assert "--out" in hint


def test_unknown_error_passthrough():
    """Test that unknown errors pass through unchanged."""
    assert interpret_solver_error(KeyError("x"), "") == ("'x'", None)


def test_format_error_with_hint():
    """Test joining a message with an optional hint."""
    assert format_error_with_hint("Main", "Try this") == "Main\nHint: Try this"
    assert format_error_with_hint("Main", None) == "Main"
