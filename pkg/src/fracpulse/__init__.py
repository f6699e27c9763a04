"""Block-pulse operational calculus for linear Caputo fractional ODEs.

The package projects signals onto a basis of disjoint unit rectangles,
replaces fractional integration by a lower-triangular Toeplitz matrix in
that basis, and reduces a linear variable-coefficient Caputo problem to one
forward substitution. See the module docstrings for the mathematics.
"""

from .basis import (
    GridConfig,
    ProjectionError,
    SignalEvaluationError,
    Spectrum,
    bp_spectrum,
    bp_value,
    monomial_spectrum,
    project_general,
    reconstruct,
)
from .exprparse import (
    EvalError,
    Expr,
    ParseError,
    UnknownIdentifierError,
    evaluate,
    parse,
    to_source,
)
from .opmatrix import OpMatrix, compose, frac_integration_matrix, gamma_fn
from .oracle import FracOrder, caputo_derivative, rl_integral, rl_integral_of_spectrum
from .probfile import ProblemFile, ProblemFileError, parse_problem_file
from .solver import (
    FDEProblem,
    FDESolution,
    FDETerm,
    NumericalError,
    SingularSystemError,
    assemble_system,
    derivative_spectra,
    residual,
    solve,
    solve_triangular,
)

__version__ = "0.1.0"

__all__ = [
    "GridConfig",
    "Spectrum",
    "SignalEvaluationError",
    "ProjectionError",
    "bp_value",
    "bp_spectrum",
    "monomial_spectrum",
    "reconstruct",
    "project_general",
    "OpMatrix",
    "gamma_fn",
    "frac_integration_matrix",
    "compose",
    "FracOrder",
    "rl_integral",
    "rl_integral_of_spectrum",
    "caputo_derivative",
    "FDETerm",
    "FDEProblem",
    "FDESolution",
    "NumericalError",
    "SingularSystemError",
    "assemble_system",
    "solve_triangular",
    "derivative_spectra",
    "solve",
    "residual",
    "Expr",
    "ParseError",
    "UnknownIdentifierError",
    "EvalError",
    "parse",
    "evaluate",
    "to_source",
    "ProblemFile",
    "ProblemFileError",
    "parse_problem_file",
    "__version__",
]
