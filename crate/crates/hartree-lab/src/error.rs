use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("grid/representation mismatch: {0}")]
    Mismatch(String),

    #[error("symbol singular at xi = 0 and no zero-mode rule declared ({0})")]
    SingularSymbol(String),

    #[error("tuple enumeration budget exceeded: {tuples} > {budget}")]
    Budget { tuples: u128, budget: u128 },

    #[error("no factorized plan available for this multiplier: {0}")]
    NoPlan(String),

    #[error("numerical abort at step {step} (t = {t}): {what}")]
    NumericalAbort { step: usize, t: f64, what: String },

    #[error("rescaled data does not fit the box: need L >= {needed:.2}, have {have:.2}")]
    RescaleSupport { needed: f64, have: f64 },

    #[error("snapshot format: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
