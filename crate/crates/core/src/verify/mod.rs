//! Exact oracles, approximation-factor bounds, and numerical checkers for
//! the identities the co-clustering guarantees rest on.

mod bounds;
mod oracle;
mod partitions;
mod projection;

pub use bounds::{combination_bound, empirical_factor, seeding_factor, theoretical_bound, BoundCase, FactorReport};
pub use oracle::{
    cotec_exact, oracle_1d_enumerate, oracle_1d_exact, oracle_optimal, oracle_optimal_with_budget, OracleOutcome,
    DEFAULT_BUDGET,
};
pub use partitions::{partition_count, stirling2_row, RestrictedGrowth};
pub use projection::{
    check_subclustering_bound, check_pythagorean, normalized_indicator, padded_power, projection_matrix,
    projection_objective, pythagorean_residual, SubclusteringCheck, ProjectionSet,
};
