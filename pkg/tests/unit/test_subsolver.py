# ABOUTME: Unit tests for the inner solver in core/subsolver.py.
# ABOUTME: Closed-form soft-threshold oracles on decoupled problems, plus monotonicity and termination checks.
"""Unit tests for the subproblem solver."""

import numpy as np
import pytest
import scipy.sparse as sp

from proxnewton.core.criteria import make_stopping_policy
from proxnewton.core.hilbert import PrimalVector
from proxnewton.core.subsolver import (
    InnerState,
    SubproblemSpec,
    SubsolverSettings,
    Termination,
    estimate_theta,
    eval_model,
    initial_state,
    preconditioned_cg,
    scalar_prox,
    smoothing_sweep,
    solve_subproblem,
    truncated_correction,
)
from proxnewton.errors.exceptions import ContractViolation, NonconvexCurvature
from tests.helpers import diagonal_toy, soft_threshold

ACCURATE = SubsolverSettings(cg_rtol=1e-12, cg_maxiter=500)


def spec_at_zero(problem, omega=0.0):
    x = PrimalVector.zeros(problem.num_dofs)
    return SubproblemSpec(
        x=x,
        grad=problem.eval_grad_f(x),
        hess=problem.eval_hessian(x),
        omega=omega,
        problem=problem,
    )


def assert_model_optimal(spec, d, atol=1e-8):
    """0 in grad + (H + omega R) d + w d|x + d|, componentwise."""
    residual = spec.grad.coeffs + spec.system_matrix @ d
    y = spec.x.coeffs + d
    w = spec.problem.l1_weights
    on = y != 0.0
    assert np.allclose(residual[on] + w[on] * np.sign(y[on]), 0.0, atol=atol)
    assert np.all(np.abs(residual[~on]) <= w[~on] + atol)


class TestScalarProx:
    def test_outside_threshold(self):
        """Test the prox when the linear term exceeds the weight."""
        assert scalar_prox(2.0, -4.0, 1.0, 0.0) == pytest.approx(1.5)

    def test_inside_threshold(self):
        """Test that the prox is zero inside the threshold."""
        assert scalar_prox(1.0, 0.5, 1.0, 0.0) == 0.0

    def test_shifted(self):
        """Test the prox with a shifted kink."""
        # minimizer of 1/2 t^2 + 0.5 |1 + t|
        assert scalar_prox(1.0, 0.0, 0.5, 1.0) == pytest.approx(-0.5)

    @pytest.mark.parametrize("a,b,w,expected", [(1.0, 2.0, 1.0, -1.0), (2.0, -1.0, 3.0, 0.0)])
    def test_unshifted_examples(self, a, b, w, expected):
        """Test the prox on worked examples without shift."""
        assert scalar_prox(a, b, w, 0.0) == pytest.approx(expected)

    def test_lands_on_kink(self):
        """Test that the prox can land exactly on a shifted kink."""
        # 1/2 t^2 - 0.5 t + 2 |t - 1|: pulled to t = 1
        assert scalar_prox(1.0, -0.5, 2.0, -1.0) == pytest.approx(1.0)

    def test_nonpositive_curvature(self):
        """Test that zero curvature raises NonconvexCurvature."""
        with pytest.raises(NonconvexCurvature):
            scalar_prox(0.0, 1.0, 1.0, 0.0)


class TestSubproblemSpec:
    def test_negative_omega(self, quad_toy):
        """Test that negative omega is rejected."""
        with pytest.raises(ContractViolation):
            spec_at_zero(quad_toy, omega=-1.0)

    def test_dimension_mismatch(self, quad_toy):
        """Test that a Hessian of the wrong size is rejected."""
        x = PrimalVector.zeros(6)
        with pytest.raises(ContractViolation):
            SubproblemSpec(x=x, grad=quad_toy.eval_grad_f(x), hess=sp.identity(5, format="csr"),
                           omega=0.0, problem=quad_toy)

    def test_eval_model_at_zero(self, quad_toy):
        """Test that the model vanishes at the zero step."""
        assert eval_model(spec_at_zero(quad_toy), PrimalVector.zeros(6)) == 0.0

    def test_eval_model_matches_objective_difference(self, quad_toy, rng):
        """Test the model against F(x + d) - F(x) for a quadratic f."""
        # omega = 0 and quadratic f: the model is exact
        spec = spec_at_zero(quad_toy)
        d = PrimalVector(rng.standard_normal(6))
        F0 = quad_toy.eval_f(spec.x) + quad_toy.eval_g(spec.x)
        F1 = quad_toy.eval_f(d) + quad_toy.eval_g(d)
        assert eval_model(spec, d) == pytest.approx(F1 - F0)

    def test_eval_model_dimension(self, quad_toy):
        """Test that a step of the wrong size is rejected."""
        with pytest.raises(ContractViolation):
            eval_model(spec_at_zero(quad_toy), PrimalVector.zeros(5))

    def test_initial_state_respects_mask(self, field_problem):
        """Test that a warm start is projected onto the free dofs."""
        spec = spec_at_zero(field_problem, omega=1.0)
        state = initial_state(spec, PrimalVector(np.ones(field_problem.num_dofs)))
        assert np.all(state.step.coeffs[field_problem.boundary_mask] == 0.0)
        assert state.model_value == pytest.approx(eval_model(spec, state.step))


class TestSweep:
    def test_decoupled_problem_solved_in_one_sweep(self):
        """Test that one sweep solves a diagonal problem."""
        a = np.array([1.0, 2.0, 4.0, 0.5])
        b = np.array([3.0, -0.5, -6.0, 0.2])
        w = np.array([1.0, 1.0, 2.0, 0.1])
        problem = diagonal_toy(a, b, w)
        spec = spec_at_zero(problem)
        state = smoothing_sweep(spec, initial_state(spec))
        assert np.allclose(state.step.coeffs, soft_threshold(b, w, a))

    def test_sweep_decreases_model(self, quad_toy, rng):
        """Test that sweeps never increase the model."""
        spec = spec_at_zero(quad_toy, omega=0.3)
        state = initial_state(spec, PrimalVector(rng.standard_normal(6)))
        for _ in range(5):
            after = smoothing_sweep(spec, state)
            assert after.model_value <= state.model_value + 1e-12
            state = after

    def test_sweep_records_origin(self, quad_toy):
        """Test that the sweep stores its starting step."""
        spec = spec_at_zero(quad_toy)
        state = smoothing_sweep(spec, initial_state(spec))
        assert np.all(state.sweep_origin == 0.0)

    def test_nonpositive_diagonal(self, quad_toy):
        """Test that a nonpositive diagonal raises NonconvexCurvature."""
        x = PrimalVector.zeros(6)
        spec = SubproblemSpec(x=x, grad=quad_toy.eval_grad_f(x), hess=-10.0 * sp.identity(6, format="csr"),
                              omega=0.0, problem=quad_toy)
        with pytest.raises(NonconvexCurvature):
            smoothing_sweep(spec, initial_state(spec))


class TestCorrection:
    def test_requires_sweep(self, quad_toy):
        """Test that the correction needs a preceding sweep."""
        spec = spec_at_zero(quad_toy)
        with pytest.raises(ContractViolation):
            truncated_correction(spec, initial_state(spec))

    def test_all_dofs_on_kinks(self):
        """Test that the correction is skipped when every dof is on a kink."""
        problem = diagonal_toy([1.0, 1.0], [0.1, -0.2], [1.0, 1.0])
        spec = spec_at_zero(problem)
        swept = smoothing_sweep(spec, initial_state(spec))
        corrected = truncated_correction(spec, swept)
        assert np.all(corrected.step.coeffs == 0.0)
        assert corrected.last_correction_norm == 0.0
        assert corrected.iteration_count == 1

    def test_never_increases_model(self, quad_toy, rng):
        """Test that the correction never increases the model."""
        spec = spec_at_zero(quad_toy, omega=0.1)
        state = initial_state(spec, PrimalVector(rng.standard_normal(6)))
        for _ in range(5):
            swept = smoothing_sweep(spec, state)
            state = truncated_correction(spec, swept)
            assert state.model_value <= swept.model_value
        assert len(state.correction_norm_history) == 5

    def test_smooth_problem_newton_step(self, quad_toy):
        """Test that without g the solve returns the Newton step."""
        smooth = quad_toy.without_nonsmooth()
        spec = spec_at_zero(smooth)
        settings = SubsolverSettings(cg_rtol=1e-13, cg_maxiter=500)
        result = solve_subproblem(spec, make_stopping_policy("exact"), settings)
        expected = np.linalg.solve(smooth.A.toarray(), smooth.b)
        assert np.allclose(result.step.coeffs, expected, atol=1e-9)


class TestPreconditionedCG:
    def test_matches_dense_solve(self, spd_matrix6, rng):
        """Test CG against a dense solve."""
        b = rng.standard_normal(6)
        x = preconditioned_cg(sp.csr_matrix(spd_matrix6), b, rtol=1e-12, maxiter=100)
        assert np.allclose(x, np.linalg.solve(spd_matrix6, b), atol=1e-9)

    def test_zero_rhs(self, spd_matrix6):
        """Test that a zero right-hand side returns zero."""
        assert np.all(preconditioned_cg(sp.csr_matrix(spd_matrix6), np.zeros(6), 1e-2, 10) == 0.0)

    def test_indefinite(self):
        """Test that CG reports negative curvature."""
        A = sp.csr_matrix(np.diag([1.0, -1.0]))
        with pytest.raises(NonconvexCurvature):
            preconditioned_cg(A, np.array([0.0, 1.0]), 1e-8, 10)


class TestEstimateTheta:
    def test_too_few_corrections(self):
        """Test that theta needs three corrections."""
        assert estimate_theta((1.0, 0.5)) is None

    def test_geometric_sequence(self):
        """Test theta on a geometric sequence."""
        assert estimate_theta((1.0, 0.5, 0.25, 0.125)) == pytest.approx(0.5)

    def test_three_corrections(self):
        """Test theta from exactly three corrections."""
        assert estimate_theta((1.0, 0.5, 0.25)) == pytest.approx(0.5)

    def test_window_uses_latest_ratios(self):
        """Test that theta only looks at the latest ratios."""
        assert estimate_theta((1.0, 0.01, 0.005, 0.0025, 0.00125)) == pytest.approx(0.5)

    def test_clipped_above(self):
        """Test that theta is clipped at 0.95."""
        assert estimate_theta((1.0, 0.9, 1.08, 0.972)) == pytest.approx(0.95)

    def test_clipped_below(self):
        """Test that theta is clipped at 0.05."""
        assert estimate_theta((1.0, 1e-3, 1e-6, 1e-9)) == pytest.approx(0.05)

    def test_zero_correction(self):
        """Test that a zero correction gives the lower clip."""
        assert estimate_theta((1.0, 0.5, 0.0)) == pytest.approx(0.05)


class TestSolveSubproblem:
    def test_exact_solve_matches_soft_threshold(self):
        """Test an exact solve against soft thresholding."""
        a = np.array([3.0, 1.0, 2.0])
        b = np.array([-5.0, 0.3, 2.5])
        w = np.array([0.5, 0.5, 0.5])
        problem = diagonal_toy(a, b, w)
        result = solve_subproblem(spec_at_zero(problem), make_stopping_policy("exact"))
        assert result.terminated_by is Termination.EXACT_TOLERANCE
        assert np.allclose(result.step.coeffs, soft_threshold(b, w, a), atol=1e-10)

    def test_inexact_solve_converged_before_estimate_defined(self):
        """Test an inexact solve that converges before theta is known."""
        problem = diagonal_toy([3.0, 1.0], [-5.0, 0.3], [0.5, 0.5])
        policy = make_stopping_policy("inexact", eta=0.5, dual_norm_sq=1.0)
        result = solve_subproblem(spec_at_zero(problem), policy)
        assert result.terminated_by is Termination.EXACT_TOLERANCE
        assert result.criteria_report.E_est is None
        assert result.binding_criterion == "relative-error"

    def test_exact_solve_is_optimal(self, quad_toy):
        """Test that an exact solve meets the model optimality conditions."""
        spec = spec_at_zero(quad_toy, omega=0.5)
        result = solve_subproblem(spec, make_stopping_policy("exact"), ACCURATE)
        assert result.terminated_by is Termination.EXACT_TOLERANCE
        assert_model_optimal(spec, result.step.coeffs)
        assert result.model_value < 0.0

    @pytest.mark.parametrize("mode", ["exact", "tight"])
    def test_accurate_modes_report_exact_tolerance(self, mode):
        """Test that exact and tight solves are labelled exact-tolerance even when the inexact tests hold."""
        problem = diagonal_toy([3.0, 1.0, 2.0], [-5.0, 0.3, 2.5], [0.5, 0.5, 0.5])
        policy = make_stopping_policy(mode, eta=0.9, dual_norm_sq=1e6)
        result = solve_subproblem(spec_at_zero(problem), policy, ACCURATE)
        assert result.criteria_report.subgradient_ok
        assert result.terminated_by is Termination.EXACT_TOLERANCE
        assert result.binding_criterion == "none"

    def test_step_norm_shrinks_with_omega(self, quad_toy):
        """Test that the step shrinks as omega grows."""
        norms = []
        for omega in (0.0, 0.5, 2.0, 10.0):
            result = solve_subproblem(spec_at_zero(quad_toy, omega), make_stopping_policy("exact"), ACCURATE)
            norms.append(result.step_norm)
        assert all(later <= earlier + 1e-10 for earlier, later in zip(norms, norms[1:]))

    def test_inexact_solve(self, quad_toy):
        """Test an inexact solve on the quadratic toy."""
        from proxnewton.core.criteria import dual_norm_of_residual
        from proxnewton.core.problem import min_norm_subgradient

        spec = spec_at_zero(quad_toy)
        mu = min_norm_subgradient(quad_toy, spec.x, spec.grad)
        dn = dual_norm_of_residual(quad_toy, spec.x, spec.grad, mu)
        policy = make_stopping_policy("inexact", eta=0.9, dual_norm_sq=dn ** 2)
        result = solve_subproblem(spec, policy)
        assert result.criteria_report.satisfied
        assert result.model_value < 0.0
        assert len(policy.reports) == result.inner_iterations
        if result.terminated_by is Termination.CRITERIA_SATISFIED:
            assert result.binding_criterion in ("relative-error", "subgradient", "both")

    def test_warm_start(self, quad_toy):
        """Test that a warm start from the solution needs no extra iterations."""
        spec = spec_at_zero(quad_toy, omega=0.5)
        cold = solve_subproblem(spec, make_stopping_policy("exact"), ACCURATE)
        warm = solve_subproblem(spec, make_stopping_policy("exact"), ACCURATE, start=cold.step)
        assert warm.inner_iterations <= cold.inner_iterations
        assert np.allclose(warm.step.coeffs, cold.step.coeffs, atol=1e-8)

    def test_nonconvexity_reported(self, quad_toy):
        """Test that nonconvexity is reported, not raised."""
        x = PrimalVector.zeros(6)
        spec = SubproblemSpec(x=x, grad=quad_toy.eval_grad_f(x), hess=-10.0 * sp.identity(6, format="csr"),
                              omega=0.0, problem=quad_toy)
        result = solve_subproblem(spec, make_stopping_policy("exact"))
        assert result.terminated_by is Termination.NONCONVEXITY
        assert result.inner_iterations == 0

    def test_iteration_cap(self, quad_toy):
        """Test termination at the inner iteration cap."""
        result = solve_subproblem(
            spec_at_zero(quad_toy), make_stopping_policy("exact"), SubsolverSettings(max_inner=1)
        )
        assert result.terminated_by is Termination.ITERATION_CAP
        assert result.inner_iterations == 1

    def test_inner_state_is_immutable(self):
        """Test that InnerState is frozen."""
        state = InnerState(step=PrimalVector.zeros(2))
        with pytest.raises(AttributeError):
            state.theta = 0.5
