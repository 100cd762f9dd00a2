# ABOUTME: Property suite for the proximal building blocks: scalar prox, scaled dual prox, and omega-dependence of exact steps.
# ABOUTME: Random quadratic + L1 instances drawn by hypothesis; inequalities checked with slack 1 + 1e-6.
"""Property tests for proximal mappings."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxnewton.core.hilbert import DualFunctional, PrimalVector, dual_norm, primal_norm
from proxnewton.core.problem import random_quadratic_l1
from proxnewton.core.subsolver import SubproblemSpec, scalar_prox
from proxnewton.diagnostics import scaled_dual_prox, tight_solve

pytestmark = pytest.mark.properties

SLACK = 1.0 + 1e-6
ABS_TOL = 1e-10

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
sizes = st.integers(min_value=2, max_value=60)


def grid_argmin(fun, lo, hi, resolution=1e-6, points=2001):
    """Minimizer of a convex scalar function by successive grid refinement."""
    while True:
        grid = np.linspace(lo, hi, points)
        h = grid[1] - grid[0]
        best = grid[np.argmin(fun(grid))]
        if h <= resolution:
            return best
        lo, hi = best - 2.0 * h, best + 2.0 * h


@settings(max_examples=1000, deadline=None)
@given(
    a=st.floats(0.1, 10.0),
    b=st.floats(-10.0, 10.0),
    w=st.floats(0.0, 5.0),
    c0=st.floats(-5.0, 5.0),
)
def test_scalar_prox_matches_grid_search(a, b, w, c0):
    def objective(t):
        return 0.5 * a * t ** 2 + b * t + w * np.abs(c0 + t)

    bound = abs(c0) + (abs(a * c0) + abs(b) + w) / a + 1.0
    assert abs(scalar_prox(a, b, w, c0) - grid_argmin(objective, -bound, bound)) <= 1e-5


@settings(max_examples=100, deadline=None)
@given(n=sizes, seed=seeds, tau=st.floats(0.1, 10.0))
def test_prox_lipschitz_in_gram_metric(n, seed, tau):
    """With H = tau R and convex g, |P(l1) - P(l2)|_X <= |l1 - l2|_X* / tau."""
    problem = random_quadratic_l1(n, seed=seed)
    rng = np.random.default_rng(seed)
    H = tau * problem.gram.matrix
    l1 = DualFunctional(rng.standard_normal(n))
    l2 = DualFunctional(rng.standard_normal(n))
    p1 = scaled_dual_prox(problem, H, l1)
    p2 = scaled_dual_prox(problem, H, l2)
    lhs = primal_norm(problem.gram, p1 - p2)
    rhs = dual_norm(problem.gram, l1 - l2) / tau
    assert lhs <= rhs * SLACK + ABS_TOL


@settings(max_examples=100, deadline=None)
@given(n=sizes, seed=seeds)
def test_second_prox_inequality(n, seed):
    """u = P(l) satisfies [l - H u](xi - u) <= g(xi) - g(u) for every xi."""
    problem = random_quadratic_l1(n, seed=seed)
    rng = np.random.default_rng(seed + 1)
    H = problem.A
    ell = DualFunctional(3.0 * rng.standard_normal(n))
    u = scaled_dual_prox(problem, H, ell)
    residual = ell.coeffs - H @ u.coeffs
    g_u = problem.eval_g(u)
    for _ in range(20):
        xi = PrimalVector(rng.standard_normal(n) * 2.0)
        assert residual @ (xi - u).coeffs <= problem.eval_g(xi) - g_u + 1e-8


def _exact_step(problem, x, omega):
    spec = SubproblemSpec(
        x=x, grad=problem.eval_grad_f(x), hess=problem.eval_hessian(x), omega=omega, problem=problem
    )
    return tight_solve(spec)


@settings(max_examples=20, deadline=None)
@given(
    n=st.integers(min_value=3, max_value=30),
    seed=seeds,
    omega=st.floats(0.01, 5.0),
    factor=st.floats(1.0, 20.0),
)
def test_omega_equivalence(n, seed, omega, factor):
    """Exact steps shrink with omega, at most by the factor (omega_tilde + kappa1) / (omega + kappa1)."""
    problem = random_quadratic_l1(n, seed=seed)
    kappa1 = problem.convexity.kappa1
    omega_tilde = omega * factor
    x = PrimalVector(np.random.default_rng(seed).standard_normal(n))

    small = _exact_step(problem, x, omega)
    large = _exact_step(problem, x, omega_tilde)
    norm_small = primal_norm(problem.gram, small)
    norm_large = primal_norm(problem.gram, large)

    assert norm_large <= norm_small * SLACK + ABS_TOL
    assert norm_small <= (omega_tilde + kappa1) / (omega + kappa1) * norm_large * SLACK + ABS_TOL
    difference = primal_norm(problem.gram, small - large)
    assert difference <= (omega_tilde - omega) / (omega + kappa1) * norm_large * SLACK + ABS_TOL
