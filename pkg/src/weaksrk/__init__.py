"""Weak stochastic Runge-Kutta schemes for Itô SDEs.

Tableaux and their order conditions, the coefficient families of order
(1,1), (2,1) and (2,2), the DRI1 scheme, a vectorized integrator driven by
discrete random increments, and Monte Carlo tooling for weak-error studies.
"""

__version__ = "0.1.0"

from .exceptions import *  # noqa: F401,F403
from .families import (
    ORDER22_CASES,
    UNSOLVABLE_CASES,
    dri1,
    dri1_m_variant,
    euler,
    lec_norm,
    make_order11,
    make_order21,
    make_order22,
    minimize_lec,
)
from .integrator import (
    EvalCounters,
    SdeProblem,
    exact_one_step_expectation,
    exact_scheme_expectation,
    integrate_path,
    step,
)
from .montecarlo import ConvergenceReport, McEstimate, convergence_study, effort, estimate, estimate_exem
from .order_conditions import OrderReport, classify
from .problems import (
    BenchmarkProblem,
    get_problem,
    problem_10_wiener,
    problem_2d_noncommutative,
    problem_gbm,
    problem_sinh,
)
from .rng import RandomStream, WeakIncrements, enumerate_support, ihat_pair, sample_increments
from .tableau import ButcherTableau, ExecutionPlan, compile_plan, validate
