//! Error type shared by all simulation stages.

use thiserror::Error;

/// Errors produced by the signal-processing and link-model operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty signal")]
    EmptySignal,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-unitary operator (residual {residual:.3e})")]
    NonUnitary { residual: f64 },

    #[error("time {t} s beyond trajectory horizon {horizon} s")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("sync failed")]
    SyncFailed,

    #[error("equalizer diverged")]
    EqualizerDiverged,

    #[error("zero power")]
    ZeroPower,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
