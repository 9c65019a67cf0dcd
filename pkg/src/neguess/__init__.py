"""Guessing under non-extensive (q-normalized) moments.

Exact finite-alphabet computations of optimal and mismatched guessing
strategies, their q-normalized moments, closed-form two-sided bounds, the
entropy functionals that appear in those bounds, and a minimax solver for
guessing under an uncertain source.
"""

from .bounds import (
    BoundReport,
    TheoremId,
    bound_L,
    bound_L_cond,
    bound_L_star,
    check_mismatch2,
    check_mismatch3,
    check_mismatch_sandwich,
    check_theorem1,
    check_theorem2,
    check_theorem3,
    lne_identity_check,
    redundancy,
)
from .entropy import (
    AlphaBeta,
    clne,
    clne_diag,
    kl,
    lne,
    lne_diag,
    relative_ab,
    relative_ab_cond,
    renyi,
    shannon,
)
from .errors import DomainError, NEGuessError, NonConvergence, NumericalInconsistency
from .guessing import (
    GuessingStrategy,
    mismatched_strategy,
    optimal_strategy,
    q_log_moment,
    q_moment,
    q_pmf_from_strategy,
)
from .minimax import (
    MinimaxResult,
    SolverConfig,
    SourceFamily,
    robust_strategy,
    solve_minimax,
    worst_redundancy,
)
from .pmf import (
    JointPmf,
    NEParams,
    Pmf,
    escort,
    escort_joint,
    load_json,
    validate_joint,
    validate_pmf,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaBeta",
    "BoundReport",
    "DomainError",
    "GuessingStrategy",
    "JointPmf",
    "MinimaxResult",
    "NEGuessError",
    "NEParams",
    "NonConvergence",
    "NumericalInconsistency",
    "Pmf",
    "SolverConfig",
    "SourceFamily",
    "TheoremId",
    "bound_L",
    "bound_L_cond",
    "bound_L_star",
    "check_mismatch2",
    "check_mismatch3",
    "check_mismatch_sandwich",
    "check_theorem1",
    "check_theorem2",
    "check_theorem3",
    "clne",
    "clne_diag",
    "escort",
    "escort_joint",
    "kl",
    "lne",
    "lne_diag",
    "lne_identity_check",
    "load_json",
    "mismatched_strategy",
    "optimal_strategy",
    "q_log_moment",
    "q_moment",
    "q_pmf_from_strategy",
    "redundancy",
    "relative_ab",
    "relative_ab_cond",
    "renyi",
    "robust_strategy",
    "shannon",
    "solve_minimax",
    "validate_joint",
    "validate_pmf",
    "worst_redundancy",
]
