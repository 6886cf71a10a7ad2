"""Stationarity, index and path-tracking tools for the Scholtes relaxation of sparsity-constrained programs.

A CCOP ``min f(x) s.t. h(x) = 0, g(x) >= 0, ||x||_0 <= s`` is lifted to the
regularized continuous reformulation R(c, eps) and relaxed to the smooth
programs S(t).  The package classifies stationary points of both (index
sets, multipliers, nondegeneracy, T-index and quadratic index), tracks KKT
points of S(t) as t decreases, and enumerates all T-stationary points of
small instances.
"""

from .activesets import (
    ActivePattern,
    InfeasiblePointError,
    Verdict,
    check_EandH,
    check_y_structure_R,
    compare_patterns,
    detect_R,
    detect_S,
    sign_split,
)
from .atlas import AtlasResult, PatternCandidate, atlas, enumerate_patterns, solve_pattern
from .exprdsl import (
    ExprDomainError,
    ExprSyntaxError,
    check_derivatives,
    eval2,
    evaluate,
    parse_expression,
    to_text,
)
from .homotopy import (
    HomotopyTrace,
    PreconditionError,
    Schedule,
    corrector_path,
    index_persistence_audit,
    multiplier_limits,
    predictor_corrector_F,
    scholtes_path,
)
from .model import (
    ModelError,
    PointXY,
    ProblemCCOP,
    RegularizationParams,
    ReformR,
    ScholtesS,
    build_reform,
    build_scholtes,
    default_params,
    feasibility_ccop,
    feasibility_R,
    feasibility_S,
    load_builtin,
    load_problem,
)
from .nlpsolver import SolveOutcome, SolverConfig, newton_polish, solve_local
from .stationarity import (
    MultiplierSetR,
    MultiplierSetS,
    StationarityReport,
    check_licq,
    classify,
    classify_R,
    classify_S,
    estimate_multipliers_R,
    estimate_multipliers_S,
    index_bound_check,
    lagrangian_hessian_R,
    lagrangian_hessian_S,
    tangent_basis,
    verify_KKT,
    verify_T_stationary,
)

__version__ = "0.1.0"
