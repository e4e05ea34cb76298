"""Sample-based utility learning and approximate equilibria in auctions."""

from .auction import (
    ALLPAY_NONE,
    ALLPAY_RANDOM,
    FPA_NONE,
    FPA_RANDOM,
    AuctionRule,
    BidDistribution,
    CandidateBid,
    Format,
    Tie,
    best_response,
    ex_post_utility,
    interim_utility_exact,
    monotone_best_response_profile,
    push_forward,
)
from .da import (
    DAMixedStrategy,
    DAOutcome,
    DAPureStrategy,
    MonotoneMixture,
    MonteCarloParams,
    PipelineReport,
    SolverParams,
    da_welfare,
    empirical_pipeline,
    ex_ante_utility_da,
    ex_ante_utility_fpa,
    lambda_map,
    mu_map,
    poa_check,
    roundtrip_check,
    simulate_da,
    smoothness_deviation,
)
from .dist import (
    DiscreteDistribution,
    ProductDistribution,
    SampleMatrix,
    empirical_marginals,
    make_discrete,
    point_mass,
    product_of,
    sample_matrix,
    truncate_at,
    uniform_on,
)
from .equilibrium import BNECertificate, equilibrium_transfer_check, solve_bne, verify_bne
from .estimate import (
    ErrorReport,
    emp_estimate,
    empp_estimate,
    label_vector_count,
    permutation_identity_check,
    shade_family,
    sup_error,
    sup_error_sweep,
)
from .lowerbound import distinguisher_experiment, gap_utility, hard_instance
from .pandora import (
    IndexPolicy,
    SearchInstance,
    opt_welfare,
    optimal_adaptive_oracle,
    pandora_from_samples,
    policy_payoff_exact,
    simulate_policy,
    weitzman_index,
    weitzman_policy,
)
from .strategy import MonotoneStrategy, StrategyProfile, check_monotone, constant, shade
