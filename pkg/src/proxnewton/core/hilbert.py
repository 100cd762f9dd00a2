# ABOUTME: Discretized Hilbert space X: primal/dual coefficient vectors, the Gram (Riesz) operator, and norms.
# ABOUTME: GramOperator caches one symmetric sparse factorization; apply_gram / riesz_inverse / primal_norm / dual_norm / inner operate on it.
"""Hilbert-space layer.

Primal vectors live in X, dual functionals in X*. The X-inner product is
realized by a sparse SPD Gram matrix R, so that ``<v, w>_X = v^T R w`` and
the dual norm of a functional l is ``sqrt(l^T R^{-1} l)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from proxnewton import config
from proxnewton.errors.exceptions import ContractViolation, SolverError

# Generalized second derivatives are plain sparse symmetric matrices
BilinearForm = sp.csr_matrix


def _as_coeffs(values) -> np.ndarray:
    coeffs = np.array(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(coeffs)):
        raise ContractViolation("coefficient vector contains non-finite entries")
    coeffs.setflags(write=False)
    return coeffs


@dataclass(frozen=True, eq=False)
class PrimalVector:
    """Coefficient vector of an element of X (node-major, 3 components per node)."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))

    @classmethod
    def zeros(cls, size: int) -> "PrimalVector":
        return cls(np.zeros(size))

    @property
    def size(self) -> int:
        return self.coeffs.size

    def __add__(self, other: "PrimalVector") -> "PrimalVector":
        _check_sizes(self.size, other.size)
        return PrimalVector(self.coeffs + other.coeffs)

    def __sub__(self, other: "PrimalVector") -> "PrimalVector":
        _check_sizes(self.size, other.size)
        return PrimalVector(self.coeffs - other.coeffs)

    def __neg__(self) -> "PrimalVector":
        return PrimalVector(-self.coeffs)

    def __mul__(self, scalar: float) -> "PrimalVector":
        return PrimalVector(float(scalar) * self.coeffs)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class DualFunctional:
    """Coefficient vector of an element of X*; entry j is the functional applied to e_j."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))

    @classmethod
    def zeros(cls, size: int) -> "DualFunctional":
        return cls(np.zeros(size))

    @property
    def size(self) -> int:
        return self.coeffs.size

    def __call__(self, v: PrimalVector) -> float:
        """Apply the functional to a primal vector."""
        _check_sizes(self.size, v.size)
        return float(self.coeffs @ v.coeffs)

    def __add__(self, other: "DualFunctional") -> "DualFunctional":
        _check_sizes(self.size, other.size)
        return DualFunctional(self.coeffs + other.coeffs)

    def __sub__(self, other: "DualFunctional") -> "DualFunctional":
        _check_sizes(self.size, other.size)
        return DualFunctional(self.coeffs - other.coeffs)

    def __neg__(self) -> "DualFunctional":
        return DualFunctional(-self.coeffs)

    def __mul__(self, scalar: float) -> "DualFunctional":
        return DualFunctional(float(scalar) * self.coeffs)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class GramOperator:
    """Sparse SPD matrix realizing the Riesz map R: X -> X*.

    The factorization is computed once in the constructor and is read-only
    afterwards, so one operator can be shared across threads.
    """

    matrix: sp.csc_matrix
    _factor: object = field(init=False, repr=False)

    def __post_init__(self):
        matrix = sp.csc_matrix(self.matrix, dtype=float)
        if matrix.shape[0] != matrix.shape[1]:
            raise ContractViolation(f"Gram matrix must be square, got shape {matrix.shape}")
        asym = abs(matrix - matrix.T)
        if asym.nnz and asym.max() != 0.0:
            raise SolverError("Gram matrix is not symmetric")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "_factor", _spd_factorize(matrix))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve R y = rhs with the cached factorization."""
        return self._factor.solve(np.asarray(rhs, dtype=float))


def _spd_factorize(matrix: sp.csc_matrix):
    """Symmetric-mode sparse LU; with diagonal pivoting the U diagonal is the LDL^T pivot set."""
    if not np.all(matrix.diagonal() > 0.0):
        raise SolverError("Gram factorization failed: nonpositive diagonal entry")
    try:
        factor = splu(
            matrix,
            permc_spec="MMD_AT_PLUS_A",
            diag_pivot_thresh=0.0,
            options={"SymmetricMode": True},
        )
    except RuntimeError as e:
        raise SolverError(f"Gram factorization failed: {e}") from e
    pivots = factor.U.diagonal()
    if not np.all(pivots > 0.0):
        raise SolverError("Gram factorization failed: matrix is not positive definite")
    return factor


def _check_sizes(n: int, m: int):
    if n != m:
        raise ContractViolation(f"dimension mismatch: {n} vs {m}")


def checked_sqrt(value: float, scale: float) -> float:
    """Clamp round-off negatives to zero; larger negatives mean R is not SPD."""
    if value >= 0.0:
        return float(np.sqrt(value))
    if value >= -config.NEGATIVE_RADICAND_TOL * max(1.0, scale):
        return 0.0
    raise SolverError(f"negative squared norm {value:.3e}; Gram operator is not SPD")


def apply_gram(R: GramOperator, v: PrimalVector) -> DualFunctional:
    """Return Rv, the functional w -> <v, w>_X."""
    _check_sizes(R.size, v.size)
    return DualFunctional(R.matrix @ v.coeffs)


def riesz_inverse(R: GramOperator, l: DualFunctional) -> PrimalVector:
    """Return R^{-1} l, the Riesz representative of l in X."""
    _check_sizes(R.size, l.size)
    return PrimalVector(R.solve(l.coeffs))


def inner(R: GramOperator, v: PrimalVector, w: PrimalVector) -> float:
    """X-inner product v^T R w."""
    _check_sizes(R.size, v.size)
    _check_sizes(v.size, w.size)
    return float(v.coeffs @ (R.matrix @ w.coeffs))


def primal_norm(R: GramOperator, v: PrimalVector) -> float:
    """||v||_X = sqrt(v^T R v)."""
    _check_sizes(R.size, v.size)
    Rv = R.matrix @ v.coeffs
    return checked_sqrt(float(v.coeffs @ Rv), float(np.abs(v.coeffs) @ np.abs(Rv)))


def dual_norm(R: GramOperator, l: DualFunctional) -> float:
    """||l||_{X*} = sqrt(l^T R^{-1} l)."""
    _check_sizes(R.size, l.size)
    y = R.solve(l.coeffs)
    return checked_sqrt(float(l.coeffs @ y), float(np.abs(l.coeffs) @ np.abs(y)))
