//! Scripted experiments, each driving one device through a full protocol
//! waveform and emitting a trace plus a line-oriented key=value summary.
//!
//! Multi-row protocols (the gate demos and the reproducibility run) are
//! recorded in a single pass: every row is followed by a 4 s zeroing hold,
//! so the concatenated trace shows the operations back to back.

use std::fmt::Write as _;

use crate::batch;
use crate::device::{DeviceParams, DEFAULT_ZERO_HOLD};
use crate::error::{Error, Result};
use crate::gate::{decode, signed_margin, GateSpec, RowInputs, RowOutcome};
use crate::instrument::{record, SimulatedPort, SourceMeasurePort};
use crate::trace::Trace;
use crate::waveform::{
    pair_sweep, square_wave, Annotation, Bit, Encoding, VoltageEvent, Waveform, DEFAULT_TIMESTEP,
};

const BINARY_ROWS: [(Bit, Bit); 4] = [
    (Bit::Zero, Bit::Zero),
    (Bit::Zero, Bit::One),
    (Bit::One, Bit::Zero),
    (Bit::One, Bit::One),
];

fn hold_steps(seconds: f64) -> u64 {
    (seconds / DEFAULT_TIMESTEP).round().max(1.0) as u64
}

/// Rows of a truth table as one waveform, each row followed by a zeroing hold.
fn table_protocol(encoding: &Encoding, rows: &[(Bit, Bit)], runs: usize) -> Waveform {
    let stride = hold_steps(DEFAULT_ZERO_HOLD) + 3;
    let mut events = Vec::with_capacity(rows.len() * runs * 4);
    for k in 0..runs * rows.len() {
        let (b1, b2) = rows[k % rows.len()];
        let offset = k as u64 * stride;
        events.push(VoltageEvent::new(offset, 0.0, Annotation::Plain));
        events.push(VoltageEvent::new(
            offset + 1,
            encoding.level(b1),
            Annotation::Bit1,
        ));
        events.push(VoltageEvent::new(
            offset + 2,
            encoding.level(b2),
            Annotation::Read,
        ));
        events.push(VoltageEvent::new(offset + 3, 0.0, Annotation::Zeroing));
    }
    Waveform::new(events, DEFAULT_TIMESTEP).expect("protocol events are grid-ordered")
}

/// One downward response spike of the square-wave run.
#[derive(Debug, Clone, Copy)]
pub struct PulseSpike {
    pub cycle: usize,
    pub step: u64,
    pub magnitude: f64,
    pub shortened: bool,
}

/// Square-wave run showing the memory effect: a one-step pulse leaves the
/// accommodation unfinished, so its downward spike is smaller.
#[derive(Debug, Clone)]
pub struct SquareWaveDemo {
    pub amplitude: f64,
    pub shortened_cycle: Option<usize>,
    pub spikes: Vec<PulseSpike>,
    pub trace: Trace,
}

impl SquareWaveDemo {
    pub fn shortened_spike(&self) -> Option<&PulseSpike> {
        self.spikes.iter().find(|s| s.shortened)
    }

    pub fn full_spikes(&self) -> impl Iterator<Item = &PulseSpike> {
        self.spikes.iter().filter(|s| !s.shortened)
    }

    /// True when the shortened cycle's downward spike is strictly smaller
    /// than every full cycle's.
    pub fn memory_effect_holds(&self) -> bool {
        match self.shortened_spike() {
            Some(short) => self.full_spikes().all(|f| short.magnitude < f.magnitude),
            None => true,
        }
    }

    /// Shortened spike magnitude over the mean full spike magnitude.
    pub fn shortened_ratio(&self) -> Option<f64> {
        let short = self.shortened_spike()?;
        let full: Vec<f64> = self.full_spikes().map(|s| s.magnitude).collect();
        if full.is_empty() {
            return None;
        }
        Some(short.magnitude / (full.iter().sum::<f64>() / full.len() as f64))
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment=square-wave");
        let _ = writeln!(out, "amplitude_V={}", self.amplitude);
        let _ = writeln!(out, "spikes={}", self.spikes.len());
        for spike in &self.spikes {
            let _ = writeln!(out, "spike_{}_A={:.6e}", spike.cycle, spike.magnitude);
            let _ = writeln!(out, "spike_{}_shortened={}", spike.cycle, spike.shortened);
        }
        if let Some(ratio) = self.shortened_ratio() {
            let _ = writeln!(out, "shortened_ratio={ratio:.6}");
        }
        let _ = writeln!(out, "pass={}", self.memory_effect_holds());
        out
    }
}

/// Square-wave pulses with one cycle shortened to a single step:
/// 1 V, 100-step half-cycles, 3 cycles, third cycle shortened.
pub fn square_wave_demo<P: SourceMeasurePort + ?Sized>(port: &mut P) -> Result<SquareWaveDemo> {
    square_wave_demo_with(port, 1.0, 100, 100, 3, Some(3))
}

pub fn square_wave_demo_with<P: SourceMeasurePort + ?Sized>(
    port: &mut P,
    amplitude: f64,
    high_steps: u64,
    low_steps: u64,
    cycles: usize,
    shortened_cycle: Option<usize>,
) -> Result<SquareWaveDemo> {
    if amplitude < 0.0 {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            value: amplitude,
            reason: "must be non-negative",
        });
    }
    let waveform = square_wave(amplitude, high_steps, low_steps, cycles, shortened_cycle)?;
    port.zero()?;
    let trace = record(port, &waveform)?;
    let mut spikes = Vec::new();
    let rows = trace.rows();
    for pair in rows.windows(2) {
        if pair[1].volts < pair[0].volts {
            let cycle = spikes.len() + 1;
            spikes.push(PulseSpike {
                cycle,
                step: pair[1].step,
                magnitude: pair[1].current.abs(),
                shortened: shortened_cycle == Some(cycle),
            });
        }
    }
    Ok(SquareWaveDemo {
        amplitude,
        shortened_cycle,
        spikes,
        trace,
    })
}

/// Reads from the two orderings of a level pair at one `v_a`:
/// `s1, t1` from `0 -> v_a -> v_b`, `t2, s2` from `0 -> v_b -> v_a`.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub v_a: f64,
    pub s1: f64,
    pub t1: f64,
    pub t2: f64,
    pub s2: f64,
}

impl SweepRow {
    /// `(s1 + t1) - (t2 + s2)`: how much the summed response depends on
    /// the order the levels were sent in.
    pub fn ordering_gap(&self) -> f64 {
        (self.s1 + self.t1) - (self.t2 + self.s2)
    }
}

/// Closed-form ordering gap: `kappa * (1 - exp(-dt/tau_u)) * (v_b - v_a)`.
pub fn predicted_ordering_gap(params: &DeviceParams, v_b: f64, v_a: f64) -> f64 {
    params.kappa * (1.0 - (-DEFAULT_TIMESTEP / params.tau_u).exp()) * (v_b - v_a)
}

/// Order-dependence sweep over first-pulse levels.
#[derive(Debug, Clone)]
pub struct NoncommutativeSweep {
    pub v_b: f64,
    pub rows: Vec<SweepRow>,
    pub trace: Trace,
}

impl NoncommutativeSweep {
    /// Every row's gap is positive for `v_a < v_b` and matches the
    /// closed form within `1e-12 + 8 * noise_sigma` amperes.
    pub fn holds(&self, params: &DeviceParams) -> bool {
        let tolerance = 1e-12 + 8.0 * params.noise_sigma;
        self.rows.iter().all(|row| {
            let gap = row.ordering_gap();
            let predicted = predicted_ordering_gap(params, self.v_b, row.v_a);
            let close = (gap - predicted).abs() <= tolerance;
            if row.v_a < self.v_b {
                close && gap > 0.0
            } else {
                close
            }
        })
    }

    /// Noise-free shape check: `s1` strictly increasing and `t1` strictly
    /// decreasing along increasing `v_a`.
    pub fn monotone(&self) -> bool {
        self.rows.windows(2).all(|pair| {
            pair[0].v_a >= pair[1].v_a || (pair[1].s1 > pair[0].s1 && pair[1].t1 < pair[0].t1)
        })
    }

    pub fn report(&self, params: &DeviceParams) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment=noncommutative");
        let _ = writeln!(out, "v_b_V={}", self.v_b);
        let _ = writeln!(out, "rows={}", self.rows.len());
        for (index, row) in self.rows.iter().enumerate() {
            let n = index + 1;
            let _ = writeln!(out, "row_{n}_v_a_V={}", row.v_a);
            let _ = writeln!(out, "row_{n}_S1_A={:.6e}", row.s1);
            let _ = writeln!(out, "row_{n}_T1_A={:.6e}", row.t1);
            let _ = writeln!(out, "row_{n}_T2_A={:.6e}", row.t2);
            let _ = writeln!(out, "row_{n}_S2_A={:.6e}", row.s2);
            let _ = writeln!(out, "row_{n}_gap_A={:.6e}", row.ordering_gap());
            let _ = writeln!(
                out,
                "row_{n}_predicted_gap_A={:.6e}",
                predicted_ordering_gap(params, self.v_b, row.v_a)
            );
        }
        let _ = writeln!(out, "pass={}", self.holds(params));
        out
    }
}

/// 13 evenly spaced first-pulse levels from 0 to `v_b` inclusive.
pub fn default_va_grid(v_b: f64) -> Vec<f64> {
    (0..13).map(|i| v_b * i as f64 / 12.0).collect()
}

/// Send both orderings of each level pair, zeroing between runs, and
/// tabulate the four reads per `v_a`.
pub fn noncommutative_sweep<P: SourceMeasurePort + ?Sized>(
    port: &mut P,
    v_b: f64,
    v_a_values: &[f64],
) -> Result<NoncommutativeSweep> {
    let pairs = pair_sweep(v_b, v_a_values)?;
    let stride = hold_steps(DEFAULT_ZERO_HOLD) + 3;
    let mut events = Vec::with_capacity(pairs.len() * 8);
    let mut segment = 0u64;
    for (ascending, descending) in &pairs {
        for waveform in [ascending, descending] {
            let offset = segment * stride;
            for event in waveform.events() {
                events.push(VoltageEvent::new(
                    offset + event.step,
                    event.volts,
                    event.annotation,
                ));
            }
            events.push(VoltageEvent::new(offset + 3, 0.0, Annotation::Zeroing));
            segment += 1;
        }
    }
    let waveform = Waveform::new(events, DEFAULT_TIMESTEP).expect("sweep events are grid-ordered");
    port.zero()?;
    let trace = record(port, &waveform)?;
    let marked: Vec<f64> = trace
        .rows()
        .iter()
        .filter(|r| matches!(r.annotation, Annotation::Bit1 | Annotation::Bit2))
        .map(|r| r.current)
        .collect();
    debug_assert_eq!(marked.len(), 4 * v_a_values.len());
    let rows = v_a_values
        .iter()
        .zip(marked.chunks_exact(4))
        .map(|(&v_a, reads)| SweepRow {
            v_a,
            s1: reads[0],
            t1: reads[1],
            t2: reads[2],
            s2: reads[3],
        })
        .collect();
    Ok(NoncommutativeSweep { v_b, rows, trace })
}

/// One decoded read of a gate demo.
#[derive(Debug, Clone, Copy)]
pub struct DemoRead {
    pub inputs: (Bit, Bit),
    pub expected: Bit,
    pub output: Bit,
    pub i_read: f64,
    pub margin: f64,
}

/// Four truth-table rows run back to back with zeroing holds between them.
#[derive(Debug, Clone)]
pub struct TableDemo {
    pub gate: String,
    pub threshold: f64,
    pub reads: Vec<DemoRead>,
    pub trace: Trace,
}

impl TableDemo {
    pub fn ones(&self) -> usize {
        self.reads.iter().filter(|r| r.output == Bit::One).count()
    }

    pub fn all_correct(&self) -> bool {
        self.reads.iter().all(|r| r.output == r.expected)
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment={}-demo", self.gate);
        let _ = writeln!(out, "gate={}", self.gate);
        let _ = writeln!(out, "threshold_A={:.6e}", self.threshold);
        let _ = writeln!(out, "rows={}", self.reads.len());
        for (index, read) in self.reads.iter().enumerate() {
            let n = index + 1;
            let _ = writeln!(out, "row_{n}_inputs={}{}", read.inputs.0, read.inputs.1);
            let _ = writeln!(out, "row_{n}_i_read_A={:.6e}", read.i_read);
            let _ = writeln!(out, "row_{n}_output={}", read.output);
            let _ = writeln!(out, "row_{n}_expected={}", read.expected);
            let _ = writeln!(out, "row_{n}_margin={:.4}", read.margin);
        }
        let _ = writeln!(out, "ones={}", self.ones());
        let _ = writeln!(out, "pass={}", self.all_correct());
        out
    }
}

fn table_demo<P: SourceMeasurePort + ?Sized>(port: &mut P, spec: &GateSpec) -> Result<TableDemo> {
    spec.validate()?;
    port.zero()?;
    let waveform = table_protocol(&spec.encoding, &BINARY_ROWS, 1);
    let trace = record(port, &waveform)?;
    let reads = BINARY_ROWS
        .iter()
        .zip(trace.reads())
        .map(|(&(b1, b2), row)| {
            let expected = match spec.truth {
                crate::gate::Truth::Binary(rows) => {
                    rows[(b1.as_u8() as usize) * 2 + b2.as_u8() as usize]
                }
                crate::gate::Truth::Unary(_) => unreachable!("demos use binary gates"),
            };
            DemoRead {
                inputs: (b1, b2),
                expected,
                output: decode(spec, row.current),
                i_read: row.current,
                margin: signed_margin(spec, row.current, expected),
            }
        })
        .collect();
    Ok(TableDemo {
        gate: spec.name.clone(),
        threshold: spec.threshold,
        reads,
        trace,
    })
}

/// The four OR rows in one recording; three reads exceed the threshold.
pub fn or_demo<P: SourceMeasurePort + ?Sized>(port: &mut P) -> Result<TableDemo> {
    table_demo(port, &GateSpec::or())
}

/// The four XOR rows in one recording; the opposite-sign rows read '1'.
pub fn xor_demo<P: SourceMeasurePort + ?Sized>(port: &mut P) -> Result<TableDemo> {
    table_demo(port, &GateSpec::xor())
}

/// Consecutive XOR truth tables with zeroing holds between every operation.
#[derive(Debug, Clone)]
pub struct XorRepro {
    pub runs: usize,
    pub rows: Vec<RowOutcome>,
    pub trace: Trace,
    pub correct: usize,
}

impl XorRepro {
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
            .expect("repro has rows")
    }

    pub fn report(&self) -> String {
        let worst = self.worst();
        let mut out = String::new();
        let _ = writeln!(out, "experiment=xor-repro");
        let _ = writeln!(out, "gate=xor");
        let _ = writeln!(out, "runs={}", self.runs);
        let _ = writeln!(out, "total={}", self.total());
        let _ = writeln!(out, "correct={}", self.correct);
        let _ = writeln!(out, "worst_margin={:.4}", worst.margin);
        let _ = writeln!(out, "worst_inputs={}", worst.inputs);
        let _ = writeln!(out, "worst_run={}", worst.repeat + 1);
        let _ = writeln!(out, "pass={}", self.all_correct());
        out
    }
}

/// Run the XOR truth table `runs` times in a row on one device.
pub fn xor_repro<P: SourceMeasurePort + ?Sized>(port: &mut P, runs: usize) -> Result<XorRepro> {
    if runs == 0 {
        return Err(Error::ZeroRepeats);
    }
    let spec = GateSpec::xor();
    port.zero()?;
    let waveform = table_protocol(&spec.encoding, &BINARY_ROWS, runs);
    let trace = record(port, &waveform)?;
    let rows: Vec<RowOutcome> = trace
        .reads()
        .enumerate()
        .map(|(index, row)| {
            let (b1, b2) = BINARY_ROWS[index % BINARY_ROWS.len()];
            let expected = match spec.truth {
                crate::gate::Truth::Binary(rows) => {
                    rows[(b1.as_u8() as usize) * 2 + b2.as_u8() as usize]
                }
                crate::gate::Truth::Unary(_) => unreachable!(),
            };
            RowOutcome {
                repeat: index / BINARY_ROWS.len(),
                inputs: RowInputs::Binary(b1, b2),
                expected,
                output: decode(&spec, row.current),
                i_read: row.current,
                margin: signed_margin(&spec, row.current, expected),
            }
        })
        .collect();
    let correct = rows.iter().filter(|r| r.correct()).count();
    Ok(XorRepro {
        runs,
        rows,
        trace,
        correct,
    })
}

/// Reproducibility across many seeds.
#[derive(Debug, Clone)]
pub struct SeedSweep {
    pub total: usize,
    pub passing: usize,
    pub failing_seeds: Vec<u64>,
}

impl SeedSweep {
    pub fn pass_fraction(&self) -> f64 {
        if self.total == 0 {
            return 1.0;
        }
        self.passing as f64 / self.total as f64
    }
}

/// Run [`xor_repro`] once per seed on independent devices; batched in
/// parallel when the `parallel` feature is enabled.
pub fn xor_repro_seed_sweep(
    params: &DeviceParams,
    seeds: &[u64],
    runs: usize,
) -> Result<SeedSweep> {
    let outcomes = batch::map_collect(seeds.len(), |index| -> Result<bool> {
        let mut port = SimulatedPort::new(params.clone(), seeds[index])?;
        Ok(xor_repro(&mut port, runs)?.all_correct())
    });
    let mut passing = 0;
    let mut failing_seeds = Vec::new();
    for (seed, outcome) in seeds.iter().zip(outcomes) {
        if outcome? {
            passing += 1;
        } else {
            failing_seeds.push(*seed);
        }
    }
    Ok(SeedSweep {
        total: seeds.len(),
        passing,
        failing_seeds,
    })
}
