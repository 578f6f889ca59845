use thiserror::Error;

/// Errors produced by the flow, integration, and solver layers.
#[derive(Debug, Error)]
pub enum FtError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vector field has no declared equilibrium")]
    MissingEquilibrium,

    #[error("declared equilibrium is not an equilibrium (residual {residual:e})")]
    BadEquilibrium { residual: f64 },

    #[error("non-finite state encountered at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("step control stalled: {0} consecutive step rejections")]
    StepControlStalled(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FtError>;
