use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("noise variance must be positive and finite, got {0}")]
    InvalidNoiseVariance(f64),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("system is not positive definite{}", fmt_time(*.time_index))]
    NotPositiveDefinite { time_index: Option<usize> },

    #[error("system of size {size} exceeds the solver cap of {cap}")]
    SystemTooLarge { size: usize, cap: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("desired-symbol gain p0 = {p0:e} is not positive{}", fmt_time(*.time_index))]
    NonPositiveGain { p0: f64, time_index: Option<usize> },

    #[error("spectrum is not positive on the frequency grid (min {0:e})")]
    NonPositiveSpectrum(f64),

    #[error("invalid grid size {0}: must be a power of two and at least 8 * channel length")]
    InvalidGrid(usize),

    #[error("trellis needs {states} states, above the cap of {cap}")]
    TooManyStates { states: usize, cap: usize },

    #[error("feedback length {0} is too large for enumeration (max 12)")]
    FeedbackTooLong(usize),

    #[error("equalizer configuration: {0}")]
    InvalidEqualizer(String),

    #[error("frame guards too short: need {needed} guard symbols, have {have}")]
    GuardTooShort { needed: usize, have: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("block {block} at {snr_db} dB failed: {source}")]
    Block {
        block: u64,
        snr_db: f64,
        #[source]
        source: Box<Error>,
    },
}

fn fmt_time(t: Option<usize>) -> String {
    match t {
        Some(n) => format!(" at time index {n}"),
        None => String::new(),
    }
}
