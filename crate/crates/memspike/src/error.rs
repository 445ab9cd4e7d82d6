use thiserror::Error;

/// Errors produced by device simulation, waveform construction, gate
/// execution and trace handling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("time step must be positive and finite, got {0} s")]
    NonPositiveStep(f64),

    #[error("level {level} V exceeds the compliance limit of {limit} V")]
    ComplianceExceeded { level: f64, limit: f64 },

    #[error("zeroing left residuals |u| = {residual_u:e} V, |s| = {residual_s:e} A")]
    ZeroingFailed { residual_u: f64, residual_s: f64 },

    #[error("bits must be separated by at least one step")]
    ZeroGap,

    #[error("square wave needs at least one cycle")]
    ZeroCycles,

    #[error("hold durations must be at least one step")]
    EmptyHold,

    #[error("shortened cycle {index} is outside 1..={cycles}")]
    ShortenedOutOfRange { index: usize, cycles: usize },

    #[error("sweep level {v_a} V exceeds the fixed second level {v_b} V")]
    SweepLevelAboveFixed { v_a: f64, v_b: f64 },

    #[error("waveform must contain grid-ordered events starting at step 0")]
    InvalidWaveform,

    #[error("waveform timestep {waveform} s does not match port timestep {port} s")]
    GridMismatch { waveform: f64, port: f64 },

    #[error("unknown gate `{0}`")]
    UnknownGate(String),

    #[error("gate `{gate}` expects {expected} input bit(s)")]
    WrongArity { gate: String, expected: usize },

    #[error("invalid gate definition for `{gate}`: {reason}")]
    InvalidGate { gate: String, reason: &'static str },

    #[error("repeat count must be at least 1")]
    ZeroRepeats,

    #[error(
        "read-current classes overlap: max '0' row {zero_max:e} A >= min '1' row {one_min:e} A"
    )]
    Inseparable { zero_max: f64, one_min: f64 },

    #[error("gate `{0}` has a single output class; nothing to calibrate")]
    SingleClass(String),

    #[error("replay diverged at step {step}: trace holds {expected} V, port was driven to {requested} V")]
    ReplayDiverged {
        step: u64,
        expected: f64,
        requested: f64,
    },

    #[error("replay trace exhausted after {0} row(s)")]
    ReplayExhausted(usize),

    #[error("trace parse error at line {line}: {message}")]
    TraceParse { line: usize, message: String },

    #[error("invalid bit `{0}` (expected 0 or 1)")]
    InvalidBit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
