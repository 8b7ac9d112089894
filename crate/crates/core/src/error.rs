use thiserror::Error;

/// Errors produced by the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cooperativity is infinite (gamma_u = 0)")]
    InfiniteCooperativity,

    #[error("time {t} outside trajectory range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("integrator could not meet tolerance at t = {t} (step {step:e})")]
    StepRejection { t: f64, step: f64 },

    #[error("residual population {residual:e} still above {threshold:e} at t = {window}")]
    NonConvergence {
        residual: f64,
        threshold: f64,
        window: f64,
    },

    #[error("emission probability product {0:e} too small to herald a swap")]
    EmissionZero(f64),

    #[error("no sweep point reached P_ex > {threshold} (best {best_p_ex})")]
    NoHighEmissionPoint { threshold: f64, best_p_ex: f64 },

    #[error("click pattern heralds no term of the scheme")]
    PostSelectionImpossible,

    #[error("network matrix is not unitary (deviation {0:e})")]
    NonUnitary(f64),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
