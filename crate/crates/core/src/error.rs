use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A circuit description violating its invariants; lists every offending field.
    #[error("invalid circuit: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("frequency diverges: {0}")]
    Divergent(String),

    #[error("no propagating mode at {omega:.6e} rad/s (cutoff {omega_ir:.6e} rad/s)")]
    Evanescent { omega: f64, omega_ir: f64 },

    #[error("ill-conditioned circuit: capacitance matrix not positive definite, smallest pivot {pivot:.3e} at node {index}")]
    IllConditioned { index: usize, pivot: f64 },

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("state is not normalized (norm² = {0:.12})")]
    NotNormalized(f64),

    #[error("empty mode set")]
    EmptyModes,

    #[error("at least {needed} modes required, got {got}")]
    TooFewModes { needed: usize, got: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
