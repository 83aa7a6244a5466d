//! Problem data and the gravity-model objective.
//!
//! An [`Instance`] holds the immutable market description: customer zones with
//! annual buying power, candidate sites with fixed opening costs, existing
//! competitor facilities, the menu of attractiveness levels with their costs,
//! and the zone-to-facility distance matrices. [`DerivedCoefficients`]
//! precomputes the gravity quantities every algorithm consumes. Both are
//! immutable after construction and safe to share across threads; all
//! operations here are pure functions of their inputs.

mod coeffs;
mod instance;
mod objective;
mod point;
#[cfg(test)]
pub(crate) mod test_fixtures;

pub use coeffs::{compute_coefficients, compute_competitor_utility, DerivedCoefficients};
pub(crate) use instance::{
    distances_from_positions as instance_distances_from_positions, euclidean as instance_euclidean,
};
pub use instance::{CandidateSite, Competitor, Instance, Levels, Zone, DISTANCE_FLOOR};
pub use objective::{
    capture_complement, capture_fraction, gradient_fhat, min_objective, min_objective_solution,
    patronage_probabilities, profit, zone_totals,
};
pub use point::{FractionalPoint, Solution};
