# ABOUTME: Small problem builders shared by unit, property and acceptance tests.
# ABOUTME: Plain functions (not fixtures) so hypothesis-driven tests can call them with drawn parameters.
"""Test helpers."""

import numpy as np
import scipy.sparse as sp

from proxnewton.core.hilbert import GramOperator, PrimalVector
from proxnewton.core.problem import QuadraticL1Problem


def diagonal_toy(diag, b, weights) -> QuadraticL1Problem:
    """Decoupled quadratic + L1 problem with identity Gram matrix."""
    n = len(diag)
    return QuadraticL1Problem(
        A=sp.diags(np.asarray(diag, dtype=float)).tocsr(),
        b=np.asarray(b, dtype=float),
        l1_weights=np.asarray(weights, dtype=float),
        gram=GramOperator(sp.identity(n, format="csc")),
    )


def soft_threshold(b, w, a):
    """Closed-form minimizer of 1/2 a t^2 - b t + w |t| per component."""
    b = np.asarray(b, dtype=float)
    return np.sign(b) * np.maximum(np.abs(b) - np.asarray(w), 0.0) / np.asarray(a)


def interior_point(problem, rng, scale=1.0) -> PrimalVector:
    """Random point that respects the Dirichlet mask."""
    values = scale * rng.standard_normal(problem.num_dofs)
    values[problem.boundary_mask] = 0.0
    return PrimalVector(values)
