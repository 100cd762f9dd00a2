# ABOUTME: Composite objectives F = f + g: the abstract interface, the vector-field model problem, and a quadratic + L1 test family.
# ABOUTME: assemble() builds the Q1 model problem; eval_F / min_norm_subgradient work on any CompositeProblem.
"""Composite minimization problems.

The model problem seeks u in H^1_0([0,1]^d, R^3) minimizing

    f(u) = int 1/2 |grad u|_F^2 + alpha max(|grad u|_F - 1, 0)^2
               + beta u1^3 u2^2 u3 / (1 + |u|^2) + rho . u
    g(u) = int c |u|_1

with f integrated by tensor Gauss quadrature and g by nodal (lumped)
quadrature, so that g is separable per coefficient.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from proxnewton import config
from proxnewton.core.fem import (
    COMPONENTS,
    UniformGrid,
    apply_dirichlet,
    scalar_stiffness_mass,
    vector_valued,
)
from proxnewton.core.hilbert import BilinearForm, DualFunctional, GramOperator, PrimalVector
from proxnewton.errors.exceptions import ContractViolation, EvaluationError


@dataclass(frozen=True)
class ConvexityEstimates:
    """Lower convexity bounds kappa1 (model) and kappa2 (g); None means unknown."""

    kappa1: Optional[float] = None
    kappa2: Optional[float] = None

    def __post_init__(self):
        if self.kappa1 is not None and self.kappa2 is not None:
            if not np.isfinite(self.kappa1 + self.kappa2):
                raise ContractViolation("kappa1 + kappa2 must be finite")


@dataclass(frozen=True)
class ObjectiveEvaluation:
    """Values of f, g and F = f + g at one point."""

    f_value: float
    g_value: float
    F_value: float


class CompositeProblem(ABC):
    """Interface of F = f + g with f smooth and g a weighted L1 norm.

    Subclasses provide ``gram``, ``boundary_mask`` (True = constrained to 0),
    ``l1_weights`` (per-dof weights of g) and ``convexity``.
    """

    gram: GramOperator
    boundary_mask: np.ndarray
    l1_weights: np.ndarray
    convexity: ConvexityEstimates

    @property
    def num_dofs(self) -> int:
        return self.gram.size

    @abstractmethod
    def eval_f(self, u: PrimalVector) -> float:
        """Smooth part f(u)."""

    @abstractmethod
    def eval_grad_f(self, u: PrimalVector) -> DualFunctional:
        """Derivative f'(u); masked entries are zero."""

    @abstractmethod
    def eval_hessian(self, u: PrimalVector) -> BilinearForm:
        """Generalized second derivative H_u; masked rows and columns are zero."""

    def eval_g(self, u: PrimalVector) -> float:
        """Nonsmooth part g(u) = sum_j w_j |u_j|."""
        if u.size != self.num_dofs:
            raise ContractViolation(f"dimension mismatch: {u.size} vs {self.num_dofs}")
        return float(self.l1_weights @ np.abs(u.coeffs))

    def _check_point(self, u: PrimalVector):
        if u.size != self.num_dofs:
            raise ContractViolation(f"dimension mismatch: {u.size} vs {self.num_dofs}")
        if np.any(u.coeffs[self.boundary_mask] != 0.0):
            raise ContractViolation("point violates the Dirichlet mask")


def eval_F(p: CompositeProblem, u: PrimalVector) -> ObjectiveEvaluation:
    """F(u) = f(u) + g(u)."""
    f_value = p.eval_f(u)
    g_value = p.eval_g(u)
    return ObjectiveEvaluation(f_value=f_value, g_value=g_value, F_value=f_value + g_value)


def min_norm_subgradient(
    p: CompositeProblem, u: PrimalVector, grad_f: DualFunctional
) -> DualFunctional:
    """Subgradient mu of g at u making f'(u) + mu as small as possible componentwise.

    Off the kinks mu is fixed by the sign of u; on a kink it is the projection
    of -f'(u) onto [-w_j, w_j].
    """
    w = p.l1_weights
    x = u.coeffs
    mu = np.where(x != 0.0, w * np.sign(x), np.clip(-grad_f.coeffs, -w, w))
    return DualFunctional(mu)


# ---------------------------------------------------------------------------
# Vector-field model problem
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemParameters:
    """Parameters of the vector-field model problem.

    Attributes:
        dim: Spatial dimension d in {1, 2, 3}
        nodes_per_axis: Grid nodes per axis (>= 3)
        alpha: Weight of the squared max-term
        beta: Weight of the rational term
        c: Weight of the L1 term (> 0)
        rho: Load factor; the force field is rho * (1, 1, 1)
        norm: "h1" (stiffness + mass) or "h1-semi" (stiffness only)
        quadrature: Rule for the beta and load terms, "gauss" or "nodal"
    """

    dim: int = config.DEFAULT_PROBLEM["dim"]
    nodes_per_axis: int = 17
    alpha: float = config.DEFAULT_PROBLEM["alpha"]
    beta: float = config.DEFAULT_PROBLEM["beta"]
    c: float = config.DEFAULT_PROBLEM["c"]
    rho: float = config.DEFAULT_PROBLEM["rho"]
    norm: Literal["h1", "h1-semi"] = config.DEFAULT_PROBLEM["norm"]
    quadrature: Literal["gauss", "nodal"] = config.DEFAULT_PROBLEM["quadrature"]

    @staticmethod
    def nodes_for_levels(levels: int) -> int:
        """Nodes per axis after ``levels`` uniform refinements of the base grid."""
        if levels < 0:
            raise ContractViolation(f"refinement levels must be >= 0, got {levels}")
        return (config.BASE_NODES_PER_AXIS - 1) * 2 ** levels + 1


def _rational(u: np.ndarray) -> np.ndarray:
    """phi(u) = u1^3 u2^2 u3 / (1 + |u|^2) over the last axis."""
    u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
    return u1 ** 3 * u2 ** 2 * u3 / (1.0 + np.sum(u * u, axis=-1))


def _rational_parts(u: np.ndarray):
    u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
    P = u1 ** 3 * u2 ** 2 * u3
    dP = np.stack([3 * u1 ** 2 * u2 ** 2 * u3, 2 * u1 ** 3 * u2 * u3, u1 ** 3 * u2 ** 2], axis=-1)
    D = 1.0 + np.sum(u * u, axis=-1)
    return P, dP, D


def _rational_grad(u: np.ndarray) -> np.ndarray:
    """Pointwise gradient of phi, shape (..., 3)."""
    P, dP, D = _rational_parts(u)
    return (dP * D[..., None] - 2.0 * P[..., None] * u) / (D ** 2)[..., None]


def _rational_hess(u: np.ndarray) -> np.ndarray:
    """Pointwise Hessian of phi, shape (..., 3, 3)."""
    u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
    P, dP, D = _rational_parts(u)
    ddP = np.zeros(u.shape + (3,))
    ddP[..., 0, 0] = 6 * u1 * u2 ** 2 * u3
    ddP[..., 1, 1] = 2 * u1 ** 3 * u3
    ddP[..., 0, 1] = ddP[..., 1, 0] = 6 * u1 ** 2 * u2 * u3
    ddP[..., 0, 2] = ddP[..., 2, 0] = 3 * u1 ** 2 * u2 ** 2
    ddP[..., 1, 2] = ddP[..., 2, 1] = 2 * u1 ** 3 * u2
    eye = np.eye(3)
    D2 = (D ** 2)[..., None, None]
    D3 = (D ** 3)[..., None, None]
    Pm = P[..., None, None]
    sym = dP[..., :, None] * u[..., None, :] + u[..., :, None] * dP[..., None, :]
    outer = u[..., :, None] * u[..., None, :]
    return (ddP * D[..., None, None] - 2.0 * Pm * eye) / D2 - 2.0 * sym / D2 + 8.0 * Pm * outer / D3


@dataclass(eq=False)
class FieldModelProblem(CompositeProblem):
    """The vector-field model problem on a uniform Q1 grid."""

    params: ProblemParameters
    grid: UniformGrid
    gram: GramOperator
    stiffness: sp.csr_matrix
    lumped_mass: np.ndarray
    boundary_mask: np.ndarray
    convexity: ConvexityEstimates = field(default_factory=lambda: ConvexityEstimates(kappa2=0.0))

    def __post_init__(self):
        self._quad = self.grid.quadrature(2)
        self.l1_weights = self.params.c * np.repeat(self.lumped_mass, COMPONENTS)

    # -- quadrature-point fields ------------------------------------------

    def _fields(self, u: PrimalVector):
        U = self.grid.gather(u.coeffs)
        J = np.einsum("qak,eac->eqck", self._quad.grad, U)
        s = np.sqrt(np.einsum("eqck,eqck->eq", J, J))
        return U, J, s

    def _pointwise_values(self, U: np.ndarray) -> np.ndarray:
        return np.einsum("qa,eac->eqc", self._quad.phi, U)

    def _nodal(self, u: PrimalVector) -> np.ndarray:
        return u.coeffs.reshape(-1, COMPONENTS)

    @staticmethod
    def _raise_nonfinite(per_element: np.ndarray, what: str):
        bad = np.flatnonzero(~np.isfinite(per_element))
        if bad.size:
            raise EvaluationError(f"non-finite {what} on element {bad[0]}", element_index=int(bad[0]))

    @staticmethod
    def _raise_nonfinite_nodal(per_node: np.ndarray, what: str):
        finite = np.isfinite(per_node.reshape(per_node.shape[0], -1)).all(axis=1)
        bad = np.flatnonzero(~finite)
        if bad.size:
            raise EvaluationError(f"non-finite nodal {what} at node {bad[0]}", node_index=int(bad[0]))

    # -- evaluation ------------------------------------------------------

    def eval_f(self, u: PrimalVector) -> float:
        self._check_point(u)
        p = self.params
        w = self._quad.weights
        with np.errstate(over="ignore", invalid="ignore"):
            U, J, s = self._fields(u)
            density = 0.5 * s ** 2 + p.alpha * np.maximum(s - 1.0, 0.0) ** 2
            if p.quadrature == "gauss":
                Uq = self._pointwise_values(U)
                density = density + p.beta * _rational(Uq) + p.rho * np.sum(Uq, axis=-1)
            per_element = density @ w
            self._raise_nonfinite(per_element, "integrand")
            total = float(np.sum(per_element))
            if p.quadrature == "nodal":
                nodal = self._nodal(u)
                per_node = self.lumped_mass * (p.beta * _rational(nodal) + p.rho * np.sum(nodal, axis=1))
                self._raise_nonfinite_nodal(per_node, "integrand")
                total += float(np.sum(per_node))
        return total

    def eval_grad_f(self, u: PrimalVector) -> DualFunctional:
        self._check_point(u)
        p = self.params
        quad = self._quad
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            U, J, s = self._fields(u)
            scale = 1.0 + np.where(s > 0.0, 2.0 * p.alpha * np.maximum(s - 1.0, 0.0) / s, 0.0)
            dJ = J * scale[..., None, None]
            ge = np.einsum("eqck,qak,q->eac", dJ, quad.grad, quad.weights)
            if p.quadrature == "gauss":
                Uq = self._pointwise_values(U)
                du = p.beta * _rational_grad(Uq) + p.rho
                ge = ge + np.einsum("eqc,qa,q->eac", du, quad.phi, quad.weights)
            self._raise_nonfinite(ge.reshape(ge.shape[0], -1).sum(axis=1), "gradient")
            grad = self.grid.scatter_vectors(ge)
            if p.quadrature == "nodal":
                nodal = self._nodal(u)
                du = self.lumped_mass[:, None] * (p.beta * _rational_grad(nodal) + p.rho)
                self._raise_nonfinite_nodal(du, "gradient")
                grad = grad + du.reshape(-1)
        grad[self.boundary_mask] = 0.0
        return DualFunctional(grad)

    def eval_hessian(self, u: PrimalVector) -> BilinearForm:
        self._check_point(u)
        p = self.params
        quad = self._quad
        n_el, nloc = self.grid.elements.shape
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            U, J, s = self._fields(u)
            # Newton derivative of the max-term: zero branch for s <= 1
            active = s > 1.0
            coef1 = 1.0 + np.where(active, 2.0 * p.alpha * (1.0 - 1.0 / s), 0.0)
            coef2 = np.where(active, 2.0 * p.alpha / s ** 3, 0.0)
            gram_q = np.einsum("qak,qbk->qab", quad.grad, quad.grad)
            H1 = np.einsum("eq,q,qab->eab", coef1, quad.weights, gram_q)
            He = np.einsum("eab,cd->eacbd", H1, np.eye(COMPONENTS))
            G = np.einsum("eqck,qak->eqca", J, quad.grad)
            He = He + np.einsum("eq,q,eqca,eqdb->eacbd", coef2, quad.weights, G, G)
            if p.quadrature == "gauss":
                Hp = p.beta * _rational_hess(self._pointwise_values(U))
                He = He + np.einsum("eqcd,q,qa,qb->eacbd", Hp, quad.weights, quad.phi, quad.phi)
            He = He.reshape(n_el, COMPONENTS * nloc, COMPONENTS * nloc)
            self._raise_nonfinite(He.reshape(n_el, -1).sum(axis=1), "Hessian")
            H = self.grid.scatter_matrices(He)
            if p.quadrature == "nodal":
                blocks = self.lumped_mass[:, None, None] * p.beta * _rational_hess(self._nodal(u))
                self._raise_nonfinite_nodal(blocks, "Hessian")
                H = H + sp.block_diag(list(blocks), format="csr")
        H = apply_dirichlet(H, self.boundary_mask, diagonal=0.0)
        return ((H + H.T) * 0.5).tocsr()


def assemble(params: ProblemParameters) -> FieldModelProblem:
    """Build the model problem: Gram matrix, lumped masses, and Dirichlet mask."""
    if params.c <= 0.0:
        raise ContractViolation(f"c must be positive, got {params.c}")
    if params.norm not in ("h1", "h1-semi"):
        raise ContractViolation(f"unknown norm '{params.norm}'. Choose 'h1' or 'h1-semi'")
    if params.quadrature not in ("gauss", "nodal"):
        raise ContractViolation(f"unknown quadrature '{params.quadrature}'. Choose 'gauss' or 'nodal'")
    grid = UniformGrid(params.dim, params.nodes_per_axis)
    K, M = scalar_stiffness_mass(grid)
    K3, M3 = vector_valued(K), vector_valued(M)
    R = K3 + M3 if params.norm == "h1" else K3
    mask = grid.boundary_mask
    R = apply_dirichlet(R, mask, diagonal=1.0)
    return FieldModelProblem(
        params=params,
        grid=grid,
        gram=GramOperator((R + R.T) * 0.5),
        stiffness=apply_dirichlet(K3, mask, diagonal=0.0),
        lumped_mass=grid.lumped_mass,
        boundary_mask=mask,
    )


# ---------------------------------------------------------------------------
# Quadratic + L1 test family
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class QuadraticL1Problem(CompositeProblem):
    """f(x) = 1/2 x^T A x - b^T x, g(x) = sum_j w_j |x_j|, with an arbitrary SPD Gram matrix."""

    A: sp.csr_matrix
    b: np.ndarray
    l1_weights: np.ndarray
    gram: GramOperator
    boundary_mask: np.ndarray = None
    convexity: ConvexityEstimates = None

    def __post_init__(self):
        self.A = sp.csr_matrix(self.A, dtype=float)
        n = self.A.shape[0]
        if self.b.shape != (n,) or self.l1_weights.shape != (n,) or self.gram.size != n:
            raise ContractViolation("A, b, weights and Gram matrix must share one dimension")
        if np.any(self.l1_weights < 0.0):
            raise ContractViolation("L1 weights must be nonnegative")
        if self.boundary_mask is None:
            self.boundary_mask = np.zeros(n, dtype=bool)
        if self.convexity is None:
            kappa1 = None
            if n <= config.DENSE_DIAGNOSTICS_MAX_DOF:
                kappa1 = float(
                    scipy.linalg.eigh(self.A.toarray(), self.gram.matrix.toarray(), eigvals_only=True)[0]
                )
            self.convexity = ConvexityEstimates(kappa1=kappa1, kappa2=0.0)

    def eval_f(self, u: PrimalVector) -> float:
        self._check_point(u)
        x = u.coeffs
        return float(0.5 * x @ (self.A @ x) - self.b @ x)

    def eval_grad_f(self, u: PrimalVector) -> DualFunctional:
        self._check_point(u)
        return DualFunctional(self.A @ u.coeffs - self.b)

    def eval_hessian(self, u: PrimalVector) -> BilinearForm:
        self._check_point(u)
        return self.A.copy()

    def without_nonsmooth(self) -> "QuadraticL1Problem":
        """Same smooth part with g switched off."""
        return QuadraticL1Problem(
            A=self.A, b=self.b, l1_weights=np.zeros_like(self.l1_weights), gram=self.gram,
            boundary_mask=self.boundary_mask, convexity=self.convexity,
        )


def random_spd(n: int, rng: np.random.Generator, low: float = 1.0, high: float = 10.0) -> np.ndarray:
    """Dense SPD matrix with eigenvalues spread uniformly in [low, high]."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = np.linspace(low, high, n)
    S = (Q * eig) @ Q.T
    return 0.5 * (S + S.T)


def random_quadratic_l1(
    n: int,
    seed: int = 0,
    kappa: float = 1.0,
    condition: float = 10.0,
    weight_scale: float = 0.5,
    identity_gram: bool = False,
) -> QuadraticL1Problem:
    """Reproducible strongly convex quadratic + L1 instance with n unknowns."""
    rng = np.random.default_rng(seed)
    A = random_spd(n, rng, kappa, kappa * condition)
    R = np.eye(n) if identity_gram else random_spd(n, rng, 0.5, 2.0)
    b = rng.standard_normal(n) * 2.0
    weights = weight_scale * rng.uniform(0.5, 1.5, n)
    return QuadraticL1Problem(
        A=sp.csr_matrix(A), b=b, l1_weights=weights, gram=GramOperator(sp.csc_matrix(R))
    )
