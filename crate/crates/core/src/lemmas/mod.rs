//! Numerical checks of the inequalities that keep the modulus from being
//! crossed.

pub mod chain;
pub mod fixture;
pub mod monotonicity;
pub mod rearrangement;

pub use chain::{crossing_bound_chain, CrossingChainReport, PolarRoute, RouteValues};
pub use fixture::{construct_crossing_profile, CrossingProfile, FixtureCheck};
pub use monotonicity::{monotonicity_gap, verify_monotonicity, MonotonicityReport, SlopeTriple};
pub use rearrangement::{
    dissipation_bound, kiselev_integral_constant, rearrangement_rhs, DissipationReport, RearrangementValue,
};
