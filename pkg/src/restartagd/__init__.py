"""Parameter-free restarted accelerated gradient descent for smooth
nonconvex minimization, with baseline solvers, built-in test problems,
sampled inequality checks, and a benchmark CLI.

The solver needs no curvature constants: it maintains working estimates of
the gradient Lipschitz constant and of the Hessian Lipschitz constant, and
restarts itself whenever an internally checkable progress condition fails.
"""

from .baselines import GdParams, LL2022Params, ParamError, gd_run, ll2022_run
from .checks import (InequalityReport, WeightError, check_descent_lemma,
                     check_jensen_gradient, check_trapezoid,
                     estimate_M_bruteforce, potential)
from .oracle import (EvalCounter, NonFiniteGradient, NonFiniteValue, Objective,
                     OracleError, OracleSession, as_point, fd_gradient)
from .problems import (DATA_ENV_VAR, PROBLEM_NAMES, DimensionError,
                       MatrixCompletionInstance, ParseError, ProblemSpec,
                       completion_init, cosine_sum, load_movielens_100k,
                       make_problem, matrix_completion, quadratic, rosenbrock,
                       synthetic_completion_instance)
from .solver import (CERTIFY_EVERY_ITER, CERTIFY_ON_CANDIDATE, M_PRACTICAL,
                     M_THEORETICAL, SolverParams, TerminationPolicy, run,
                     theta, update_average)
from .trace import (REPORT_SCHEMA, RunReport, TraceRecord, read_trace_csv,
                    report_to_dict, write_report_json, write_trace_csv)

__version__ = "0.1.0"

__all__ = [
    "CERTIFY_EVERY_ITER", "CERTIFY_ON_CANDIDATE", "DATA_ENV_VAR",
    "DimensionError", "EvalCounter", "GdParams", "InequalityReport",
    "LL2022Params", "M_PRACTICAL", "M_THEORETICAL",
    "MatrixCompletionInstance", "NonFiniteGradient", "NonFiniteValue",
    "Objective", "OracleError", "OracleSession", "PROBLEM_NAMES",
    "ParamError", "ParseError", "ProblemSpec", "REPORT_SCHEMA", "RunReport",
    "SolverParams", "TerminationPolicy", "TraceRecord", "WeightError",
    "as_point", "check_descent_lemma", "check_jensen_gradient",
    "check_trapezoid", "completion_init", "cosine_sum",
    "estimate_M_bruteforce", "fd_gradient", "gd_run", "ll2022_run",
    "load_movielens_100k", "make_problem", "matrix_completion", "potential",
    "quadratic", "read_trace_csv", "report_to_dict", "rosenbrock", "run",
    "synthetic_completion_instance", "theta", "update_average",
    "write_report_json", "write_trace_csv",
]
