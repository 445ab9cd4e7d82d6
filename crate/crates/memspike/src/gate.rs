//! Gates as (encoding, threshold, comparator, truth table): execution on a
//! port, decoding, truth-table verification, threshold calibration and
//! race-hazard timing checks.
//!
//! Decoding is magnitude-based for every gate: the output is '1' iff the
//! current sampled at the second bit exceeds the threshold in absolute
//! value. OR's (1,0) row produces a negative read spike that still counts
//! as a '1' peak, and XOR is explicitly defined on absolute current.

use std::fmt;

use crate::batch;
use crate::device::{derive_seed, DeviceParams};
use crate::error::{Error, Result};
use crate::instrument::{record, SimulatedPort, SourceMeasurePort};
use crate::trace::Trace;
use crate::waveform::{encode_bits, Bit, Encoding, DEFAULT_TIMESTEP};

/// OR decision threshold, amperes.
pub const OR_THRESHOLD: f64 = 1.8e-8;
/// Alternative, lower OR threshold that also separates the classes.
pub const OR_THRESHOLD_LOW: f64 = 5.0e-9;
/// XOR decision threshold, amperes.
pub const XOR_THRESHOLD: f64 = 1.25e-8;

/// How a read current is turned into a bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    /// Output '1' iff `|i_read| > threshold`.
    Magnitude,
}

/// Expected outputs of a gate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Truth {
    /// Outputs for two-bit inputs, row order 00, 01, 10, 11.
    Binary([Bit; 4]),
    /// Outputs for a single input bit, order 0, 1.
    Unary([Bit; 2]),
}

impl Truth {
    fn pair(&self, b1: Bit, b2: Bit) -> Option<Bit> {
        match self {
            Truth::Binary(rows) => Some(rows[(b1.as_u8() as usize) * 2 + b2.as_u8() as usize]),
            Truth::Unary(_) => None,
        }
    }

    fn unary(&self, a: Bit) -> Bit {
        match self {
            Truth::Unary(rows) => rows[a.as_u8() as usize],
            // a unary run through a binary gate fixes the first bit to 1
            Truth::Binary(rows) => rows[2 + a.as_u8() as usize],
        }
    }
}

/// A logic gate definition.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub name: String,
    pub encoding: Encoding,
    /// Decision threshold, amperes.
    pub threshold: f64,
    pub comparator: Comparator,
    pub truth: Truth,
}

impl GateSpec {
    /// Inclusive OR: 0 -> 0.01 V, 1 -> 0.2 V, threshold 18 nA.
    pub fn or() -> Self {
        GateSpec {
            name: "or".into(),
            encoding: Encoding {
                zero: 0.01,
                one: 0.2,
            },
            threshold: OR_THRESHOLD,
            comparator: Comparator::Magnitude,
            truth: Truth::Binary([Bit::Zero, Bit::One, Bit::One, Bit::One]),
        }
    }

    /// Exclusive OR: 0 -> -0.1 V, 1 -> +0.1 V, threshold 12.5 nA.
    pub fn xor() -> Self {
        GateSpec {
            name: "xor".into(),
            encoding: Encoding {
                zero: -0.1,
                one: 0.1,
            },
            threshold: XOR_THRESHOLD,
            comparator: Comparator::Magnitude,
            truth: Truth::Binary([Bit::Zero, Bit::One, Bit::One, Bit::Zero]),
        }
    }

    /// NOT via XOR with a fixed first bit of 1.
    pub fn not() -> Self {
        GateSpec {
            name: "not".into(),
            truth: Truth::Unary([Bit::One, Bit::Zero]),
            ..GateSpec::xor()
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "or" => Ok(GateSpec::or()),
            "xor" => Ok(GateSpec::xor()),
            "not" => Ok(GateSpec::not()),
            other => Err(Error::UnknownGate(other.to_string())),
        }
    }

    /// Number of input bits.
    pub fn arity(&self) -> usize {
        match self.truth {
            Truth::Binary(_) => 2,
            Truth::Unary(_) => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() || self.threshold <= 0.0 {
            return Err(Error::InvalidGate {
                gate: self.name.clone(),
                reason: "threshold must be positive",
            });
        }
        if self.encoding.zero == self.encoding.one {
            return Err(Error::InvalidGate {
                gate: self.name.clone(),
                reason: "encoding must map 0 and 1 to distinct levels",
            });
        }
        Ok(())
    }
}

/// Outcome of one gate execution.
#[derive(Debug, Clone)]
pub struct GateResult {
    pub output: Bit,
    pub expected: Bit,
    /// Current sampled at the second bit, amperes.
    pub i_read: f64,
    /// `|i_read| / threshold - 1`, sign flipped so correct rows are positive.
    pub margin: f64,
    pub trace: Trace,
}

impl GateResult {
    pub fn correct(&self) -> bool {
        self.output == self.expected
    }
}

/// Execution knobs for [`run_gate_with`].
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Zero the port before sending the bits (default true).
    pub zero_first: bool,
    /// Steps between the first and second bit (default 1).
    pub gap_steps: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            zero_first: true,
            gap_steps: 1,
        }
    }
}

pub(crate) fn decode(spec: &GateSpec, i_read: f64) -> Bit {
    match spec.comparator {
        Comparator::Magnitude => Bit::from(i_read.abs() > spec.threshold),
    }
}

pub(crate) fn signed_margin(spec: &GateSpec, i_read: f64, expected: Bit) -> f64 {
    let raw = i_read.abs() / spec.threshold - 1.0;
    match expected {
        Bit::One => raw,
        Bit::Zero => -raw,
    }
}

fn execute<P: SourceMeasurePort + ?Sized>(
    port: &mut P,
    spec: &GateSpec,
    b1: Bit,
    b2: Bit,
    expected: Bit,
    options: RunOptions,
) -> Result<GateResult> {
    spec.validate()?;
    if options.zero_first {
        port.zero()?;
    }
    let waveform = encode_bits(&spec.encoding, b1, b2, options.gap_steps)?;
    let trace = record(port, &waveform)?;
    let i_read = trace
        .reads()
        .next()
        .expect("encoded waveforms carry a read event")
        .current;
    let output = decode(spec, i_read);
    let margin = signed_margin(spec, i_read, expected);
    debug_assert_eq!(output, Bit::from(i_read.abs() > spec.threshold));
    Ok(GateResult {
        output,
        expected,
        i_read,
        margin,
        trace,
    })
}

/// Zero the device (unless opted out), send the two bits one gap apart and
/// decode the current sampled at the second bit.
pub fn run_gate_with<P: SourceMeasurePort + ?Sized>(
    port: &mut P,
    spec: &GateSpec,
    b1: Bit,
    b2: Bit,
    options: RunOptions,
) -> Result<GateResult> {
    let expected = spec.truth.pair(b1, b2).ok_or(Error::WrongArity {
        gate: spec.name.clone(),
        expected: 1,
    })?;
    execute(port, spec, b1, b2, expected, options)
}

/// [`run_gate_with`] under default options (zeroing first, one-step gap).
pub fn run_gate<P: SourceMeasurePort + ?Sized>(
    port: &mut P,
    spec: &GateSpec,
    b1: Bit,
    b2: Bit,
) -> Result<GateResult> {
    run_gate_with(port, spec, b1, b2, RunOptions::default())
}

/// NOT: the input rides as the second pulse after a fixed logical-1 first
/// pulse, so the decode is XOR(1, a) = NOT a. A literal single-pulse variant
/// is not realizable: with no reference pulse the read magnitude is the same
/// for both inputs.
pub fn run_not<P: SourceMeasurePort + ?Sized>(
    port: &mut P,
    spec: &GateSpec,
    a: Bit,
) -> Result<GateResult> {
    let expected = spec.truth.unary(a);
    execute(port, spec, Bit::One, a, expected, RunOptions::default())
}

/// Inputs of one truth-table row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowInputs {
    Unary(Bit),
    Binary(Bit, Bit),
}

impl fmt::Display for RowInputs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowInputs::Unary(a) => write!(f, "{a}"),
            RowInputs::Binary(a, b) => write!(f, "{a}{b}"),
        }
    }
}

/// One executed truth-table row.
#[derive(Debug, Clone)]
pub struct RowOutcome {
    pub repeat: usize,
    pub inputs: RowInputs,
    pub expected: Bit,
    pub output: Bit,
    pub i_read: f64,
    pub margin: f64,
}

impl RowOutcome {
    pub fn correct(&self) -> bool {
        self.output == self.expected
    }
}

/// All rows of a gate's truth table, `repeats` times over.
#[derive(Debug, Clone)]
pub struct TruthTableReport {
    pub gate: String,
    pub repeats: usize,
    /// Repeat-major row outcomes.
    pub rows: Vec<RowOutcome>,
    /// Recorded trace per row, aligned with `rows`.
    pub traces: Vec<Trace>,
    pub correct: usize,
}

impl TruthTableReport {
    pub fn total(&self) -> usize {
        self.rows.len()
    }

    pub fn all_correct(&self) -> bool {
        self.correct == self.total()
    }

    pub fn worst(&self) -> &RowOutcome {
        self.rows
            .iter()
            .min_by(|a, b| a.margin.total_cmp(&b.margin))
            .expect("report has rows")
    }

    /// Minimum margin seen for each distinct input row.
    pub fn min_margin_per_row(&self) -> Vec<(RowInputs, f64)> {
        let mut mins: Vec<(RowInputs, f64)> = Vec::new();
        for row in &self.rows {
            match mins.iter_mut().find(|(inputs, _)| *inputs == row.inputs) {
                Some((_, min)) => *min = min.min(row.margin),
                None => mins.push((row.inputs, row.margin)),
            }
        }
        mins
    }
}

fn input_rows(spec: &GateSpec) -> Vec<RowInputs> {
    match spec.truth {
        Truth::Binary(_) => vec![
            RowInputs::Binary(Bit::Zero, Bit::Zero),
            RowInputs::Binary(Bit::Zero, Bit::One),
            RowInputs::Binary(Bit::One, Bit::Zero),
            RowInputs::Binary(Bit::One, Bit::One),
        ],
        Truth::Unary(_) => vec![RowInputs::Unary(Bit::Zero), RowInputs::Unary(Bit::One)],
    }
}

/// Run every input row `repeats` times, each on an independent device with
/// a sub-seed derived from `(seed, task index)`, zeroed before the bits are
/// sent. Rows run in parallel when the `parallel` feature is enabled.
pub fn truth_table(
    params: &DeviceParams,
    seed: u64,
    spec: &GateSpec,
    repeats: usize,
) -> Result<TruthTableReport> {
    if repeats == 0 {
        return Err(Error::ZeroRepeats);
    }
    spec.validate()?;
    let inputs = input_rows(spec);
    let per_repeat = inputs.len();
    let outcomes = batch::map_collect(per_repeat * repeats, |index| -> Result<_> {
        let mut port = SimulatedPort::new(params.clone(), derive_seed(seed, index as u64))?;
        let inputs = inputs[index % per_repeat];
        let result = match inputs {
            RowInputs::Binary(b1, b2) => run_gate(&mut port, spec, b1, b2)?,
            RowInputs::Unary(a) => run_not(&mut port, spec, a)?,
        };
        Ok((
            RowOutcome {
                repeat: index / per_repeat,
                inputs,
                expected: result.expected,
                output: result.output,
                i_read: result.i_read,
                margin: result.margin,
            },
            result.trace,
        ))
    });
    let mut rows = Vec::with_capacity(outcomes.len());
    let mut traces = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        let (row, trace) = outcome?;
        rows.push(row);
        traces.push(trace);
    }
    let correct = rows.iter().filter(|r| r.correct()).count();
    Ok(TruthTableReport {
        gate: spec.name.clone(),
        repeats,
        rows,
        traces,
        correct,
    })
}

/// A calibrated decision threshold and the class bounds it separates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Midpoint between the two class bounds, amperes.
    pub threshold: f64,
    /// Largest read magnitude over '0'-output rows, amperes.
    pub zero_max: f64,
    /// Smallest read magnitude over '1'-output rows, amperes.
    pub one_min: f64,
}

/// Find the threshold midway between the largest '0'-row and smallest
/// '1'-row read magnitudes over noise-free runs.
///
/// Drives the bit waveforms directly, so it works on gates whose threshold
/// or encoding is not (yet) valid; a same-voltage encoding simply measures
/// coinciding classes and fails as inseparable.
pub fn calibrate_threshold(
    params: &DeviceParams,
    spec: &GateSpec,
    trials: usize,
) -> Result<Calibration> {
    if trials == 0 {
        return Err(Error::ZeroRepeats);
    }
    let quiet = params.clone().without_noise();
    let inputs = input_rows(spec);
    let per_trial = inputs.len();
    let readings = batch::map_collect(per_trial * trials, |index| -> Result<(Bit, f64)> {
        let mut port = SimulatedPort::new(quiet.clone(), derive_seed(0, index as u64))?;
        let (b1, b2, expected) = match inputs[index % per_trial] {
            RowInputs::Binary(b1, b2) => (
                b1,
                b2,
                spec.truth
                    .pair(b1, b2)
                    .expect("binary rows on binary truth"),
            ),
            RowInputs::Unary(a) => (Bit::One, a, spec.truth.unary(a)),
        };
        port.zero()?;
        let waveform = encode_bits(&spec.encoding, b1, b2, 1)?;
        let trace = record(&mut port, &waveform)?;
        let i_read = trace
            .reads()
            .next()
            .expect("encoded waveforms carry a read event")
            .current;
        Ok((expected, i_read.abs()))
    });
    let mut zero_max = f64::NEG_INFINITY;
    let mut one_min = f64::INFINITY;
    for reading in readings {
        let (expected, magnitude) = reading?;
        match expected {
            Bit::Zero => zero_max = zero_max.max(magnitude),
            Bit::One => one_min = one_min.min(magnitude),
        }
    }
    if !zero_max.is_finite() || !one_min.is_finite() {
        return Err(Error::SingleClass(spec.name.clone()));
    }
    if zero_max >= one_min {
        return Err(Error::Inseparable { zero_max, one_min });
    }
    Ok(Calibration {
        threshold: (zero_max + one_min) / 2.0,
        zero_max,
        one_min,
    })
}

/// Outcome of a race-hazard timing check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RaceCheck {
    Ok {
        gap_seconds: f64,
        window_seconds: f64,
    },
    Violation {
        gap_seconds: f64,
        window_seconds: f64,
        /// Fraction of the short-term memory lost over the gap.
        decayed_fraction: f64,
    },
}

impl RaceCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, RaceCheck::Ok { .. })
    }
}

/// The second bit must arrive within the memory window, taken as
/// `3 * tau_u`. Gaps are measured on the default 0.02 s grid.
pub fn check_race_hazard(
    spec: &GateSpec,
    gap_steps: u64,
    params: &DeviceParams,
) -> Result<RaceCheck> {
    spec.validate()?;
    params.validate()?;
    if gap_steps == 0 {
        return Err(Error::ZeroGap);
    }
    let gap_seconds = gap_steps as f64 * DEFAULT_TIMESTEP;
    let window_seconds = 3.0 * params.tau_u;
    if gap_seconds <= window_seconds {
        Ok(RaceCheck::Ok {
            gap_seconds,
            window_seconds,
        })
    } else {
        Ok(RaceCheck::Violation {
            gap_seconds,
            window_seconds,
            decayed_fraction: 1.0 - (-gap_seconds / params.tau_u).exp(),
        })
    }
}
