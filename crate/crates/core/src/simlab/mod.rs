//! Monte Carlo engine, statistics and closed-form bounds.

mod aggregate;
mod bounds;
mod claims;
mod fit;
mod identities;
mod trial;

pub use aggregate::{aggregate, monte_carlo, run_trials, AggregateStats, Frequency, ProbeStats, ScalarStats, Z95};
pub use bounds::{
    bounds_summary, lower_bound_combiner, lower_bound_combiner_check, lower_bound_combiner_floor,
    lower_bound_combiner_optimizers, tuned_upper_bound, upper_bound_formula, upper_bound_tuned_params, BoundsSummary,
};
pub use claims::{
    claim_statistics, ClaimCheck, ClaimReport, Direction, EventCheck, CLAIM1_DESK_THRESHOLD, CLAIM3_DESK_FRACTION,
    EVENT_DESK_THRESHOLD, SE_ALLOWANCE,
};
pub use fit::{scaling_fit, ScalingFit, ScalingPoint};
pub use identities::{
    expected_next_distribution, math_helper_checks, round_moments, MathHelperReport, RoundMoments, LOG_BOUND_GRID,
    MOMENT_CONFIGS,
};
pub use trial::{
    checkpoint_rounds, observation_floor, probe_rounds, run_trial, InvariantAudit, PathPoint, ProbeSample, Trajectory,
    CHECKPOINT_BUDGET, PROBE_COUNT,
};
