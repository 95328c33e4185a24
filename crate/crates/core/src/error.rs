use thiserror::Error;

/// Errors raised by grid construction, evolution and the norm machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("node (u = {u}, ub = {ub}) lies outside the slab")]
    OutsideDomain { u: f64, ub: f64 },

    /// First node where the field became non-finite or exceeded the blow-up threshold.
    #[error("blow-up at u = {u}, ub = {ub}, theta index {theta_index}: |phi| = {value}")]
    BlowUp {
        u: f64,
        ub: f64,
        theta_index: usize,
        value: f64,
    },

    #[error("diamond corrector failed to contract at u = {u}, ub = {ub} (predictor change {first}, corrector change {second})")]
    StepFailure {
        u: f64,
        ub: f64,
        first: f64,
        second: f64,
    },

    #[error("unknown quantity `{0}`")]
    UnknownQuantity(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
