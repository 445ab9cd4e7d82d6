//! Simulation of a spiking memristor and the single-device temporal logic
//! it supports.
//!
//! A change of the applied voltage triggers a current spike whose size
//! depends on an internal short-term memory that accommodates to the recent
//! voltage history. Sending two bits as voltage levels one sample apart lets
//! the first bit condition the spike produced by the second; thresholding
//! the magnitude of the current sampled at the second bit decodes OR, XOR
//! and NOT on one two-terminal device. Holding 0 V for a few seconds erases
//! the memory between operations.
//!
//! - [`device`] — the discrete-time device model and its parameters.
//! - [`waveform`] — grid-aligned voltage event sequences (bit encodings,
//!   square waves, level-pair sweeps).
//! - [`instrument`] — the source-measure port trait, the simulated port,
//!   trace recording and replay.
//! - [`trace`] — sampled series and the `step,t_s,v_V,i_A,annotation` CSV.
//! - [`gate`] — gate definitions, execution, truth tables, calibration and
//!   race-hazard checks.
//! - [`experiment`] — scripted protocol reproductions with key=value
//!   summaries.
//! - [`batch`] — parallel batch execution (rayon behind the `parallel`
//!   feature, sequential otherwise).

pub mod batch;
pub mod device;
pub mod error;
pub mod experiment;
pub mod gate;
pub mod instrument;
pub mod trace;
pub mod waveform;

pub use device::{derive_seed, Device, DeviceParams, DEFAULT_ZERO_HOLD};
pub use error::{Error, Result};
pub use gate::{
    calibrate_threshold, check_race_hazard, run_gate, run_gate_with, run_not, truth_table,
    Calibration, Comparator, GateResult, GateSpec, RaceCheck, RowInputs, RowOutcome, RunOptions,
    Truth, TruthTableReport, OR_THRESHOLD, OR_THRESHOLD_LOW, XOR_THRESHOLD,
};
pub use instrument::{record, RecordError, ReplayPort, SimulatedPort, SourceMeasurePort};
pub use trace::{Trace, TraceRow, TRACE_CSV_HEADER};
pub use waveform::{
    encode_bits, pair_sweep, square_wave, Annotation, Bit, Encoding, VoltageEvent, Waveform,
    DEFAULT_TIMESTEP,
};
