# ABOUTME: Uniform tensor grids on [0,1]^d with multilinear Q1 elements: reference basis, quadrature, gather/scatter, and sparse assembly.
# ABOUTME: Element arrays are assembled through scipy.sparse COO triplets; vector fields carry 3 components per node in node-major order.
"""Q1 finite elements on a uniform grid.

Nodes are numbered in C order over the multi-index (i_0, ..., i_{d-1});
local node ``a`` of an element sits at offset ``(a >> k) & 1`` along axis k.
Vector-valued degrees of freedom are ``3 * node + component``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce
from itertools import product

import numpy as np
import scipy.sparse as sp

from proxnewton.errors.exceptions import ContractViolation

COMPONENTS = 3


def gauss_legendre_01(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights mapped to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class ReferenceQ1:
    """Q1 basis values and reference gradients at tensor Gauss points.

    Attributes:
        phi: (nq, nloc) basis values
        dphi: (nq, nloc, d) gradients with respect to reference coordinates
        weights: (nq,) quadrature weights on the unit cube
    """

    phi: np.ndarray
    dphi: np.ndarray
    weights: np.ndarray


def q1_reference(dim: int, npts: int = 2) -> ReferenceQ1:
    """Tabulate the Q1 basis on the unit cube with an npts^dim Gauss rule."""
    x1, w1 = gauss_legendre_01(npts)
    points = np.array(list(product(x1, repeat=dim)))
    weights = np.array([np.prod(w) for w in product(w1, repeat=dim)])
    nloc = 2 ** dim
    bits = np.array([[(a >> k) & 1 for k in range(dim)] for a in range(nloc)])

    # factors[q, a, k] = xi_k if bit set else 1 - xi_k
    factors = np.where(bits[None, :, :] == 1, points[:, None, :], 1.0 - points[:, None, :])
    phi = np.prod(factors, axis=2)
    dphi = np.empty((points.shape[0], nloc, dim))
    for k in range(dim):
        others = np.prod(np.delete(factors, k, axis=2), axis=2)
        dphi[:, :, k] = np.where(bits[None, :, k] == 1, 1.0, -1.0) * others
    return ReferenceQ1(phi=phi, dphi=dphi, weights=weights)


@dataclass(frozen=True)
class UniformGrid:
    """Uniform tensor grid with ``nodes_per_axis`` nodes along each of ``dim`` axes."""

    dim: int
    nodes_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ContractViolation(f"dimension must be 1, 2 or 3, got {self.dim}")
        if self.nodes_per_axis < 3:
            raise ContractViolation(f"need at least 3 nodes per axis, got {self.nodes_per_axis}")

    @property
    def h(self) -> float:
        return 1.0 / (self.nodes_per_axis - 1)

    @property
    def num_nodes(self) -> int:
        return self.nodes_per_axis ** self.dim

    @property
    def num_dofs(self) -> int:
        return COMPONENTS * self.num_nodes

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.nodes_per_axis,) * self.dim

    @cached_property
    def elements(self) -> np.ndarray:
        """(n_el, 2^d) node indices of every element."""
        n = self.nodes_per_axis
        corners = np.array(list(product(range(n - 1), repeat=self.dim)))
        nloc = 2 ** self.dim
        offsets = np.array([[(a >> k) & 1 for k in range(self.dim)] for a in range(nloc)])
        multi = corners[:, None, :] + offsets[None, :, :]
        return np.ravel_multi_index(tuple(multi[..., k] for k in range(self.dim)), self.shape)

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        """Boolean mask over nodes; True on the boundary of [0,1]^d."""
        idx = np.indices(self.shape).reshape(self.dim, -1)
        return np.any((idx == 0) | (idx == self.nodes_per_axis - 1), axis=0)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """Boolean mask over dofs; all 3 components of boundary nodes are constrained."""
        return np.repeat(self.boundary_nodes, COMPONENTS)

    @cached_property
    def lumped_mass(self) -> np.ndarray:
        """Nodal trapezoidal weights; they sum to |Omega| = 1."""
        w1 = np.full(self.nodes_per_axis, self.h)
        w1[[0, -1]] = 0.5 * self.h
        return reduce(np.multiply.outer, [w1] * self.dim).reshape(-1)

    def quadrature(self, npts: int = 2) -> "ElementQuadrature":
        """Physical basis data for a tensor Gauss rule with npts points per axis."""
        ref = q1_reference(self.dim, npts)
        return ElementQuadrature(
            phi=ref.phi,
            grad=ref.dphi / self.h,
            weights=ref.weights * self.h ** self.dim,
        )

    def gather(self, u: np.ndarray) -> np.ndarray:
        """Element-local nodal values, shape (n_el, 2^d, 3)."""
        return u.reshape(self.num_nodes, COMPONENTS)[self.elements]

    def scatter_vectors(self, element_vectors: np.ndarray) -> np.ndarray:
        """Sum (n_el, 2^d, 3) element contributions into a dof vector."""
        out = np.zeros((self.num_nodes, COMPONENTS))
        np.add.at(out, self.elements, element_vectors)
        return out.reshape(-1)

    def scatter_matrices(self, element_matrices: np.ndarray) -> sp.csr_matrix:
        """Sum (n_el, 3*2^d, 3*2^d) element matrices with local dof order (a, c)."""
        local_dofs = (COMPONENTS * self.elements[:, :, None] + np.arange(COMPONENTS)).reshape(
            self.elements.shape[0], -1
        )
        nloc = local_dofs.shape[1]
        rows = np.repeat(local_dofs, nloc, axis=1).reshape(-1)
        cols = np.tile(local_dofs, (1, nloc)).reshape(-1)
        A = sp.coo_matrix(
            (element_matrices.reshape(-1), (rows, cols)), shape=(self.num_dofs, self.num_dofs)
        )
        return A.tocsr()


@dataclass(frozen=True)
class ElementQuadrature:
    """Basis values, physical gradients, and weights shared by all elements of a uniform grid."""

    phi: np.ndarray
    grad: np.ndarray
    weights: np.ndarray


def scalar_stiffness_mass(grid: UniformGrid) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Scalar Q1 stiffness and consistent mass matrices (no boundary treatment)."""
    quad = grid.quadrature(2)
    Ke = np.einsum("q,qak,qbk->ab", quad.weights, quad.grad, quad.grad)
    Me = np.einsum("q,qa,qb->ab", quad.weights, quad.phi, quad.phi)
    n_el, nloc = grid.elements.shape
    rows = np.repeat(grid.elements, nloc, axis=1).reshape(-1)
    cols = np.tile(grid.elements, (1, nloc)).reshape(-1)
    shape = (grid.num_nodes, grid.num_nodes)
    K = sp.coo_matrix((np.tile(Ke.reshape(-1), n_el), (rows, cols)), shape=shape).tocsr()
    M = sp.coo_matrix((np.tile(Me.reshape(-1), n_el), (rows, cols)), shape=shape).tocsr()
    return K, M


def vector_valued(A: sp.spmatrix) -> sp.csr_matrix:
    """Block-diagonal extension to 3 components with node-major dof order."""
    return sp.kron(A, sp.identity(COMPONENTS), format="csr")


def apply_dirichlet(A: sp.spmatrix, mask: np.ndarray, diagonal: float = 1.0) -> sp.csr_matrix:
    """Zero masked rows and columns, then put ``diagonal`` on the masked diagonal."""
    keep = sp.diags((~mask).astype(float))
    fixed = sp.diags(np.where(mask, diagonal, 0.0))
    return (keep @ A @ keep + fixed).tocsr()
