# ABOUTME: Package root of proxnewton, an inexact proximal Newton solver with an experiment CLI.
# ABOUTME: Re-exports the main solver entry points.
"""proxnewton: inexact proximal Newton methods in discretized Hilbert spaces."""

__version__ = "0.1.0"

from proxnewton.core.outer import OuterConfig, RunReport, run
from proxnewton.core.problem import (
    FieldModelProblem,
    ProblemParameters,
    QuadraticL1Problem,
    assemble,
    random_quadratic_l1,
)

__all__ = [
    "OuterConfig",
    "RunReport",
    "run",
    "FieldModelProblem",
    "ProblemParameters",
    "QuadraticL1Problem",
    "assemble",
    "random_quadratic_l1",
]
