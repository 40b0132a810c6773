use thiserror::Error;

/// Errors produced by the analytic and simulation kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A distribution or model parameter failed validation at construction.
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    /// The degree distribution has zero mean, so edge-based quantities
    /// (size-biased law, threshold parameter) are undefined.
    #[error("degenerate degree distribution: mean is zero")]
    DegenerateDegree,

    /// An argument fell outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// A triangular solve produced a value incompatible with a probability;
    /// the system is ill-conditioned for these parameters.
    #[error("ill-conditioned mass-function solve: entry {index} = {value}")]
    IllConditioned { index: usize, value: f64 },

    /// An iterative solver failed to converge.
    #[error("numerical non-convergence: {0}")]
    NonConvergence(&'static str),

    /// No parameter value attains the requested threshold.
    #[error("no root: the threshold parameter stays at or below one for every rate")]
    NoRoot,

    /// Exhaustive enumeration was requested outside its supported range.
    #[error("enumeration unsupported: {0}")]
    NotEnumerable(&'static str),

    /// An index referred outside the household.
    #[error("index {index} out of range for household of size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    /// The operation requires the uniform-random initial-infective mode.
    #[error("unsupported initial mode: {0}")]
    UnsupportedInitialMode(&'static str),

    /// Model and network disagree on the household size.
    #[error("household size mismatch: params say {params}, network says {network}")]
    HouseholdMismatch { params: usize, network: usize },

    /// No individual in the network has the requested degree.
    #[error("no individual of degree {degree} exists in this network")]
    NoMatchingIndividual { degree: usize },
}
