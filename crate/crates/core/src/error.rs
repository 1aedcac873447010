use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("system of {num_spins} spins exceeds the addressable basis size")]
    SizeOverflow { num_spins: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("spin site {site} out of range for {num_spins} spins")]
    SiteOutOfRange { site: usize, num_spins: usize },

    #[error("pair term couples site {0} to itself")]
    SameSite(usize),

    #[error("duplicate pair term ({0}, {1})")]
    DuplicatePair(usize, usize),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("dense matrix of dimension {dim} exceeds cap {cap}")]
    DenseCapExceeded { dim: usize, cap: usize },

    #[error("invalid propagator: {0}")]
    InvalidPropagator(String),

    #[error("order {order} too small for Bessel argument {z}")]
    BesselOrderTooSmall { z: f64, order: usize },

    #[error("seed {seed} failed: {message}")]
    SeedFailed { seed: u64, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
