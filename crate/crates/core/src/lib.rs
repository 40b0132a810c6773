//! Kernels for SIR epidemics on configuration-model networks with household
//! structure.
//!
//! The model: a population of `m` households of `n` individuals each.  An
//! infective contacts each household member at per-pair rate `lambda_local`
//! and each neighbour in a configuration-model multigraph at per-pair rate
//! `lambda_global`, for an infectious period drawn once per individual.
//!
//! The crate provides
//!
//! * [`degree`] — global-degree distributions (pmf, PGF, moments, size-biased
//!   companion, sampling),
//! * [`period`] — infectious-period distributions via their Laplace transform,
//! * [`household`] — within-household final-size and susceptibility-set
//!   distributions (triangular solves), exhaustive/Monte-Carlo oracles, and
//!   the offspring samplers used by the branching approximations,
//! * [`analytics`] — the household-level threshold parameter, offspring PGFs,
//!   smallest fixed points, major-outbreak probability, expected relative
//!   final size, and critical-rate solving,
//! * [`network`] — finite-population multigraph construction by uniform
//!   half-edge pairing, with imperfection statistics,
//! * [`simulator`] — final-outcome epidemics on built networks and
//!   reproducible replicate batches.
//!
//! Everything is deterministic given its inputs plus a caller-owned generator
//! state; nothing here performs IO.  The crate is `no_std`-compatible
//! (`--no-default-features --features libm`); only `alloc` is required.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod analytics;
pub mod degree;
mod error;
pub mod household;
mod math;
pub mod network;
pub mod period;
pub mod simulator;

pub use analytics::{
    critical_lambda_g, expected_relative_final_size, global_contact_prob, major_outbreak_prob,
    r_star, smallest_fixed_point, AnalyticsOptions, AnalyticsReport, InitialMode, MethodTag,
    ModelParams, PgfPair,
};
pub use degree::{DegreeDistribution, DegreeFamily};
pub use error::Error;
pub use household::{
    mean_local_final_size, local_final_size_dist, susceptibility_set_dist, LocalDigraph,
    MassFunction, SeedConvention,
};
pub use network::{build_network, imperfection_stats, ImperfectionStats, Network};
pub use period::{contact_prob, InfectiousPeriod};
pub use simulator::{
    classify_major, run_batch, run_epidemic, BatchConfig, BatchSummary, EpidemicOutcome,
};

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
