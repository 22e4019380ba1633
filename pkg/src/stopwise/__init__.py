"""Risk-sensitive optimal stopping under partial observation.

Computes certainty-equivalent-optimal stopping rules by backward
induction over an augmented state (observable state, belief, accumulated
reward), specializes to Bayesian house selling with reservation-level
policies at finite and infinite horizon, and ships independent
verification oracles (brute-force rule enumeration, Monte Carlo). A CLI
and an HTTP advisor service expose the solvers.
"""

from .belief import (
    Bernoulli,
    BetaBernoulli,
    ContinuousMixture,
    DiscretePosterior,
    ExponentialMean,
    FiniteTable,
    InvGammaExp,
    SecondOrderBeta,
    lr_compare,
    predictive,
    second_order_beta_density,
    update,
)
from .errors import (
    BudgetExceededError,
    DomainError,
    InfeasibleObservationError,
    NonConvergenceError,
    RangeError,
)
from .house_selling import (
    AdvisorState,
    HouseModel,
    LowerBoundReport,
    ReservationTable,
    advise,
    behavior_table,
    belief_key,
    check_lower_bound,
    commitment_levels,
    decision_level,
    encode_as_po,
    entropic_ce_stable,
    gamma_thresholds,
    make_advisor,
    policy_value,
    rejection_bands,
    rejection_count,
    reservation_level_infinite,
    reservation_levels_exp,
    reservation_levels_finite,
    simulate_reservation_policy,
)
from .oracle_sim import (
    BruteForceReport,
    McEstimate,
    brute_force_value,
    evaluate_rule,
    monte_carlo_eval,
)
from .stopping_core import (
    AugState,
    ExpTable,
    PartiallyObservableModel,
    PolicyTree,
    ValueReport,
    check_integrability,
    exp_value_iteration,
    extract_stopping_time,
    marginal_kernel,
    value_iteration,
)
from .utility import (
    DiscreteDist,
    RiskAversionReport,
    UtilitySpec,
    arrow_pratt,
    certainty_equivalent,
    compare_risk_aversion,
    entropic_ce_normal,
    eval_inverse,
    eval_utility,
    normal_quadrature,
)

__version__ = "0.1.0"

__all__ = [
    "AdvisorState",
    "AugState",
    "Bernoulli",
    "BetaBernoulli",
    "BruteForceReport",
    "BudgetExceededError",
    "ContinuousMixture",
    "DiscreteDist",
    "DiscretePosterior",
    "DomainError",
    "ExpTable",
    "ExponentialMean",
    "FiniteTable",
    "HouseModel",
    "InfeasibleObservationError",
    "InvGammaExp",
    "LowerBoundReport",
    "McEstimate",
    "NonConvergenceError",
    "PartiallyObservableModel",
    "PolicyTree",
    "RangeError",
    "ReservationTable",
    "RiskAversionReport",
    "SecondOrderBeta",
    "UtilitySpec",
    "ValueReport",
    "advise",
    "arrow_pratt",
    "behavior_table",
    "belief_key",
    "brute_force_value",
    "certainty_equivalent",
    "check_integrability",
    "check_lower_bound",
    "commitment_levels",
    "compare_risk_aversion",
    "decision_level",
    "encode_as_po",
    "entropic_ce_normal",
    "entropic_ce_stable",
    "eval_inverse",
    "eval_utility",
    "evaluate_rule",
    "exp_value_iteration",
    "extract_stopping_time",
    "gamma_thresholds",
    "lr_compare",
    "make_advisor",
    "marginal_kernel",
    "monte_carlo_eval",
    "policy_value",
    "rejection_bands",
    "rejection_count",
    "reservation_level_infinite",
    "reservation_levels_exp",
    "reservation_levels_finite",
    "simulate_reservation_policy",
    "value_iteration",
    "__version__",
]
