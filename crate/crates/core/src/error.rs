use thiserror::Error;

/// Errors raised by the model, integrator and stability routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported Bessel order {0} (|n| must not exceed 64)")]
    UnsupportedOrder(i64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("resonance violation: Omega/omega = {ratio} is not an integer")]
    ResonanceViolation { ratio: f64 },

    #[error("wrong parity: operation needs {expected} resonance order, got n = {n}")]
    WrongParity { expected: &'static str, n: i64 },

    #[error(
        "degenerate Floquet basis (eigenvector condition number {condition:e}); \
         use the numerical integrator instead"
    )]
    Degenerate { condition: f64 },

    #[error("amplitude diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("singular matrix in decomposition")]
    Singular,

    #[error("trajectory grids do not align: {0}")]
    Alignment(String),

    #[error("loss must dominate gain: beta_r = {beta_r} < beta_l = {beta_l}")]
    Prerequisite { beta_l: f64, beta_r: f64 },

    #[error("invalid scan grid: {0}")]
    InvalidGrid(String),

    #[error("invalid integration config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
