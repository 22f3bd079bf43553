//! Rate allocation over the capacity region of a Gaussian multiple-access
//! channel.
//!
//! The capacity region is the polymatroid
//! `{R >= 0 : sum_{i in S} R_i <= C(sum_{i in S} P_i, N_0) for all S}`
//! with `C(P, N) = ln(1 + P/N) / 2`. All rates are in **nats** per channel
//! use; divide by `ln 2` for bits.
//!
//! [`solve`] maximizes a concave [`Utility`] over the region by gradient
//! projection, where the projection is approximated by successive
//! projections onto violated constraints. Violated constraints are found
//! either by exhaustive search or, in polynomial time, by the rate-splitting
//! analysis in [`oracle`].
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below name the usual double precision instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod optimizer;
pub mod oracle;
pub mod projection;
pub mod scalar;
pub mod subset;
pub mod utility;

pub use channel::{awgn_capacity, ChannelConfig, RateVector, BRUTE_FORCE_MAX_USERS};
pub use error::{Error, Result};
pub use optimizer::{
    alpha_max, count_violations, expansion_delta, greedy_vertex, solve, IterationRecord,
    IterationTrace, SolveSettings, StepsizeRule,
};
pub use oracle::{
    elevation, find_violated_most, find_violated_most_with_tol, rate_split_analyze,
    rate_split_analyze_with_tol, Configuration, Finder, SpinOffUser, ViolationReport,
};
pub use projection::{approximate_projection, project_onto_hyperplane, ProjectionResult};
pub use scalar::Scalar;
pub use subset::UserSubset;
pub use utility::{LinearUtility, Utility, WeightedLogUtility};

pub type ChannelConfigF64 = ChannelConfig<f64>;
pub type ChannelConfigF32 = ChannelConfig<f32>;
pub type RateVectorF64 = RateVector<f64>;
pub type RateVectorF32 = RateVector<f32>;
pub type LinearUtilityF64 = LinearUtility<f64>;
pub type WeightedLogUtilityF64 = WeightedLogUtility<f64>;
pub type StepsizeRuleF64 = StepsizeRule<f64>;
pub type SolveSettingsF64 = SolveSettings<f64>;
pub type IterationTraceF64 = IterationTrace<f64>;
pub type ViolationReportF64 = ViolationReport<f64>;
pub type FinderF64 = Finder<f64>;
