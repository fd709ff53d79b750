use thiserror::Error;

/// Errors raised by the verification toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rapidities must be pairwise distinct (duplicate at index {index})")]
    DegenerateRapidities { index: usize },

    #[error("size limit exceeded: {what} = {value} (max {max})")]
    SizeLimit {
        what: &'static str,
        value: usize,
        max: usize,
    },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("Bethe solver did not converge after {iterations} iterations (residual {residual:e})")]
    SolverDiverged { iterations: usize, residual: f64 },

    #[error("spectral parameter coincides with rapidity k[{index}]")]
    PoleAtRapidity { index: usize },

    #[error("R-matrix is singular at lambda = mu")]
    RMatrixPole,

    #[error("per-site cutoff d = {cutoff} is too small for sector N = {sector} (need d >= N + 2)")]
    CutoffTooSmall { cutoff: usize, sector: usize },

    #[error("spectral parameter outside the convergence domain: {0}")]
    ConvergenceDomain(String),

    #[error("quadrature failed to converge: {0}")]
    QuadratureError(String),

    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumbers(String),

    #[error("series error: {0}")]
    Series(String),

    #[error("invalid JSON document: {0}")]
    Json(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
