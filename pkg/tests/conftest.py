# ABOUTME: Pytest fixtures and configuration shared across the proxnewton test suite.
# ABOUTME: Hosts small reusable problem instances (Gram operators, quadratic + L1 toys, a 5x5 field problem).
"""Pytest fixtures and configuration for proxnewton tests."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

import numpy as np
import pytest
import scipy.sparse as sp

from proxnewton.core.hilbert import GramOperator
from proxnewton.core.problem import (
    ProblemParameters,
    assemble,
    random_quadratic_l1,
    random_spd,
)


@pytest.fixture(scope="session")
def project_root():
    """Return the project root directory."""
    return Path(__file__).parent.parent


@pytest.fixture
def rng():
    """Fresh seeded generator per test."""
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def spd_matrix6():
    """Dense 6x6 SPD matrix."""
    return random_spd(6, np.random.default_rng(7), 0.5, 4.0)


@pytest.fixture(scope="session")
def gram6(spd_matrix6):
    """Gram operator of a random 6x6 SPD matrix."""
    return GramOperator(sp.csc_matrix(spd_matrix6))


@pytest.fixture(scope="session")
def quad_toy():
    """Strongly convex quadratic + L1 instance with 6 unknowns and a non-diagonal Gram matrix."""
    return random_quadratic_l1(6, seed=3)


@pytest.fixture(scope="session")
def field_problem():
    """Model problem on a 5x5 grid (27 free dofs)."""
    return assemble(ProblemParameters(dim=2, nodes_per_axis=5))

