"""Decision criteria, divergence analysis and Monte Carlo checks for St. Petersburg-type lotteries."""

__version__ = "0.1.0"

from .criteria import (  # noqa: E402
    CriterionId,
    CriterionValue,
    EvalConfig,
    Recommendation,
    Tag,
    TruncationPolicy,
    classify_divergence,
    cost_term,
    eval_criterion,
    expected_net_log_utility,
    gain_term,
    truncated_criterion_iii,
)
from .errors import DiagnosticError, DomainError, NegativeAmountError  # noqa: E402
from .logamount import LogAmount  # noqa: E402
from .model import Game, PlayerState, log_limit, payout_log, waiting_prob, worst_case_net  # noqa: E402
from .solver import (  # noqa: E402
    breakeven_price,
    nmax_curve,
    nmax_required,
    p0_of_nmax,
    rejecting_price,
    resolves_matrix,
)

__all__ = [
    "__version__",
    "CriterionId",
    "CriterionValue",
    "DiagnosticError",
    "DomainError",
    "EvalConfig",
    "Game",
    "LogAmount",
    "NegativeAmountError",
    "PlayerState",
    "Recommendation",
    "Tag",
    "TruncationPolicy",
    "breakeven_price",
    "classify_divergence",
    "cost_term",
    "eval_criterion",
    "expected_net_log_utility",
    "gain_term",
    "log_limit",
    "nmax_curve",
    "nmax_required",
    "p0_of_nmax",
    "payout_log",
    "rejecting_price",
    "resolves_matrix",
    "truncated_criterion_iii",
    "waiting_prob",
    "worst_case_net",
]
