//! Offline instance analysis and regret-bound evaluation.

mod bounds;
mod partition;

pub use bounds::{
    bayes_risk_bound, bayes_risk_constant, bound_cumulative, bound_one_step, bound_subopt_prob, bound_three_regime,
    least_threshold, one_step_constant, regime_constants, subopt_prob_capped, BoundConstants, BoundCurve, BoundKind,
    RegimeConstants, MAX_REGIME_COEFFICIENT,
};
pub use partition::{
    epsilon_lower_bound, gap_report, optimality_partition, subopt_distance, subopt_gap, GapReport, OptimalityPartition,
    Segment, BOUNDARY_TOL,
};

/// Grid step used when a partition is built implicitly.
pub const DEFAULT_RESOLUTION: f64 = 1e-3;
