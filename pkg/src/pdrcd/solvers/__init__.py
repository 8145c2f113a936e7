from .dual import DualState, dual_step, solve_dual
from .primal import PrimalState, primal_step, solve_primal
from .reference import Reference, reference_optimum, ridge_solution
from .trace import TRACE_COLUMNS, SolverTrace, StoppingRule, read_trace_csv

__all__ = [
    "DualState", "PrimalState", "Reference", "SolverTrace", "StoppingRule",
    "TRACE_COLUMNS", "dual_step", "primal_step", "read_trace_csv",
    "reference_optimum", "ridge_solution", "solve_dual", "solve_primal",
]
