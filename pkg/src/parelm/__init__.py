"""Random-sigmoid collocation for 1-D linear parabolic PDEs.

The spatial solution is a fixed random sigmoid network fitted by
minimum-norm least squares at collocation points; time marching uses the
theta-method or backward differentiation formulas, one stationary solve
per step.
"""

from .basis import ElmBasis, sample_basis
from .lsq import CodFactorization, LsSolution, min_norm_solve, pivoted_qr_solve
from .marching import (
    BdfScheme,
    ThetaScheme,
    WeightHistory,
    assemble_step_matrix,
    assemble_step_rhs,
    bdf_coefficients,
    bdf_coefficients_exact,
    parse_scheme,
    run_time_loop,
    starting_procedure,
)
from .problems import (
    CollocationGrid,
    ProblemSpec,
    get_problem,
    make_grid,
    problem_a,
    problem_b,
    problem_c,
)
from .solver import (
    SolveConfig,
    SolveReport,
    convergence_study,
    fit_initial,
    linf_error,
    observed_orders,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "ElmBasis",
    "sample_basis",
    "CodFactorization",
    "LsSolution",
    "min_norm_solve",
    "pivoted_qr_solve",
    "BdfScheme",
    "ThetaScheme",
    "WeightHistory",
    "assemble_step_matrix",
    "assemble_step_rhs",
    "bdf_coefficients",
    "bdf_coefficients_exact",
    "parse_scheme",
    "run_time_loop",
    "starting_procedure",
    "CollocationGrid",
    "ProblemSpec",
    "get_problem",
    "make_grid",
    "problem_a",
    "problem_b",
    "problem_c",
    "SolveConfig",
    "SolveReport",
    "convergence_study",
    "fit_initial",
    "linf_error",
    "observed_orders",
    "solve",
]
