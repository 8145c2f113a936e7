"""Primal and dual randomized coordinate descent for L2-regularized ERM,
with a structural cost model that predicts which of the two is cheaper."""

from .analyzer import (
    ComplexityReport,
    binary_extremes,
    check_theorem_bounds,
    cost_cd,
    cost_cp,
    recommend,
    total_complexity,
)
from .losses import LogisticLoss, SquaredLoss, make_loss
from .matrix import DualIndexedSparseMatrix, normalize_columns, read_libsvm, stats, write_libsvm
from .sampling import importance, uniform
from .solvers import reference_optimum, solve_dual, solve_primal

__version__ = "0.1.0"

__all__ = [
    "ComplexityReport", "DualIndexedSparseMatrix", "LogisticLoss", "SquaredLoss",
    "binary_extremes", "check_theorem_bounds", "cost_cd", "cost_cp", "importance",
    "make_loss", "normalize_columns", "read_libsvm", "recommend", "reference_optimum",
    "solve_dual", "solve_primal", "stats", "total_complexity", "uniform", "write_libsvm",
]
