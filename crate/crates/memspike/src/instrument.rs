//! Virtual source-measure unit: the seam between gate logic and whatever
//! sources a voltage and measures a current — a simulated device here,
//! recorded data for replay, hardware behind the same trait later.

use std::fmt;

use crate::device::{Device, DeviceParams, DEFAULT_ZERO_HOLD};
use crate::error::{Error, Result};
use crate::trace::{Trace, TraceRow};
use crate::waveform::{Annotation, Waveform, DEFAULT_TIMESTEP};

/// A stepped source-measure channel.
///
/// The port produces one sample per grid instant. `set_level` moves to the
/// next instant and drives the source, so the following `read` is the first
/// measurement after the change and sees the fresh transient. A `read`
/// without a pending instant advances one step on its own, so repeated reads
/// stream consecutive samples.
pub trait SourceMeasurePort {
    /// Advance one timestep and drive the source to `volts`.
    fn set_level(&mut self, volts: f64) -> Result<()>;

    /// Current at the pending sample instant, advancing one step first if
    /// the previous instant was already read.
    fn read(&mut self) -> Result<f64>;

    /// Let `seconds` pass without touching the source level.
    fn elapse(&mut self, seconds: f64) -> Result<()>;

    /// Grid step, seconds.
    fn timestep(&self) -> f64;

    /// Hold 0 V long enough to erase the device's short-term memory.
    fn zero(&mut self) -> Result<()> {
        self.set_level(0.0)?;
        self.elapse(DEFAULT_ZERO_HOLD)
    }
}

/// Port backed by the simulated device model.
#[derive(Debug, Clone)]
pub struct SimulatedPort {
    device: Device,
    timestep: f64,
    pending: bool,
}

impl SimulatedPort {
    pub fn new(params: DeviceParams, seed: u64) -> Result<Self> {
        SimulatedPort::with_timestep(params, seed, DEFAULT_TIMESTEP)
    }

    pub fn with_timestep(params: DeviceParams, seed: u64, timestep: f64) -> Result<Self> {
        if !timestep.is_finite() || timestep <= 0.0 {
            return Err(Error::NonPositiveStep(timestep));
        }
        Ok(SimulatedPort {
            device: Device::new(params, seed)?,
            timestep,
            pending: false,
        })
    }

    pub fn device(&self) -> &Device {
        &self.device
    }

    pub fn into_device(self) -> Device {
        self.device
    }
}

impl SourceMeasurePort for SimulatedPort {
    fn set_level(&mut self, volts: f64) -> Result<()> {
        self.device.advance(self.timestep)?;
        self.device.apply_voltage(volts)?;
        self.pending = true;
        Ok(())
    }

    fn read(&mut self) -> Result<f64> {
        if !self.pending {
            self.device.advance(self.timestep)?;
        }
        self.pending = false;
        Ok(self.device.sample_current())
    }

    fn elapse(&mut self, seconds: f64) -> Result<()> {
        self.device.advance(seconds)?;
        self.pending = true;
        Ok(())
    }

    fn timestep(&self) -> f64 {
        self.timestep
    }

    fn zero(&mut self) -> Result<()> {
        self.device.zero()?;
        self.pending = false;
        Ok(())
    }
}

/// Port that plays back a recorded trace: `set_level` must match the stored
/// voltage sequence and `read` returns the stored currents. Lets gate logic
/// run against captured data.
#[derive(Debug, Clone)]
pub struct ReplayPort {
    rows: Vec<TraceRow>,
    timestep: f64,
    cursor: Option<usize>,
    pending: bool,
}

impl ReplayPort {
    pub fn new(trace: &Trace) -> Self {
        ReplayPort {
            rows: trace.rows().to_vec(),
            timestep: trace.timestep(),
            cursor: None,
            pending: false,
        }
    }

    fn step_cursor(&mut self, by: usize) -> Result<usize> {
        let next = match self.cursor {
            None => by - 1,
            Some(pos) => pos + by,
        };
        if next >= self.rows.len() {
            return Err(Error::ReplayExhausted(self.rows.len()));
        }
        self.cursor = Some(next);
        Ok(next)
    }
}

impl SourceMeasurePort for ReplayPort {
    fn set_level(&mut self, volts: f64) -> Result<()> {
        let pos = self.step_cursor(1)?;
        let row = &self.rows[pos];
        if (row.volts - volts).abs() > 1e-9 * volts.abs().max(1.0) {
            return Err(Error::ReplayDiverged {
                step: row.step,
                expected: row.volts,
                requested: volts,
            });
        }
        self.pending = true;
        Ok(())
    }

    fn read(&mut self) -> Result<f64> {
        if !self.pending {
            self.step_cursor(1)?;
        }
        self.pending = false;
        let pos = self.cursor.ok_or(Error::ReplayExhausted(0))?;
        Ok(self.rows[pos].current)
    }

    fn elapse(&mut self, seconds: f64) -> Result<()> {
        if !seconds.is_finite() || seconds <= 0.0 {
            return Err(Error::NonPositiveStep(seconds));
        }
        let steps = (seconds / self.timestep).round().max(1.0) as usize;
        self.step_cursor(steps)?;
        self.pending = true;
        Ok(())
    }

    fn timestep(&self) -> f64 {
        self.timestep
    }

    /// Replayed data was captured with its own zeroing; nothing to do.
    fn zero(&mut self) -> Result<()> {
        Ok(())
    }
}

/// A port error along with whatever was recorded before it struck.
#[derive(Debug)]
pub struct RecordError {
    pub source: Error,
    pub partial: Trace,
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "recording failed after {} row(s): {}",
            self.partial.len(),
            self.source
        )
    }
}

impl std::error::Error for RecordError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

impl From<RecordError> for Error {
    fn from(err: RecordError) -> Error {
        err.source
    }
}

/// Drive `waveform` through `port`, sampling every grid step.
pub fn record<P: SourceMeasurePort + ?Sized>(
    port: &mut P,
    waveform: &Waveform,
) -> std::result::Result<Trace, RecordError> {
    let dt = waveform.timestep();
    let mut trace = Trace::new(dt);
    if (dt - port.timestep()).abs() > 1e-12 {
        return Err(RecordError {
            source: Error::GridMismatch {
                waveform: dt,
                port: port.timestep(),
            },
            partial: trace,
        });
    }
    let events = waveform.events();
    let mut next_event = 0;
    let mut level = 0.0;
    for step in 0..=waveform.last_step() {
        let annotation = if next_event < events.len() && events[next_event].step == step {
            let event = events[next_event];
            next_event += 1;
            if let Err(source) = port.set_level(event.volts) {
                return Err(RecordError {
                    source,
                    partial: trace,
                });
            }
            level = event.volts;
            event.annotation
        } else {
            if let Err(source) = port.elapse(dt) {
                return Err(RecordError {
                    source,
                    partial: trace,
                });
            }
            Annotation::Plain
        };
        let current = match port.read() {
            Ok(i) => i,
            Err(source) => {
                return Err(RecordError {
                    source,
                    partial: trace,
                })
            }
        };
        trace.push(TraceRow {
            step,
            volts: level,
            current,
            annotation,
        });
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{encode_bits, Bit, Encoding, VoltageEvent};
    use approx::assert_relative_eq;

    fn quiet_port(seed: u64) -> SimulatedPort {
        SimulatedPort::new(DeviceParams::default().without_noise(), seed).unwrap()
    }

    #[test]
    fn first_read_after_set_level_sees_the_fresh_spike() {
        let mut port = quiet_port(0);
        port.set_level(0.1).unwrap();
        let i = port.read().unwrap();
        assert_relative_eq!(i, 3.0e-8, max_relative = 1e-12);
    }

    #[test]
    fn repeated_reads_stream_decaying_samples() {
        let mut port = quiet_port(0);
        port.set_level(0.1).unwrap();
        let first = port.read().unwrap();
        let second = port.read().unwrap();
        let g_dc = 1.0e-7;
        let decay = (second - g_dc * 0.1) / (first - g_dc * 0.1);
        assert_relative_eq!(decay, (-0.02f64 / 0.007).exp(), max_relative = 1e-9);
    }

    #[test]
    fn elapse_then_read_is_quiet_at_zero_volts() {
        let mut port = quiet_port(0);
        port.set_level(0.1).unwrap();
        port.read().unwrap();
        port.set_level(0.0).unwrap();
        port.elapse(4.0).unwrap();
        let i = port.read().unwrap();
        assert!(i.abs() < 1e-12);
    }

    #[test]
    fn record_or_01_three_rows() {
        let enc = Encoding {
            zero: 0.01,
            one: 0.2,
        };
        let wf = encode_bits(&enc, Bit::Zero, Bit::One, 1).unwrap();
        let mut port = quiet_port(0);
        let trace = record(&mut port, &wf).unwrap();
        assert_eq!(trace.len(), 3);
        let read = trace.reads().next().unwrap();
        assert_relative_eq!(read.current, 5.8735758882342885e-8, max_relative = 1e-12);
    }

    #[test]
    fn recording_is_deterministic_per_seed() {
        let enc = Encoding {
            zero: 0.01,
            one: 0.2,
        };
        let wf = encode_bits(&enc, Bit::One, Bit::One, 1).unwrap();
        let noisy = DeviceParams::default();
        let mut a = SimulatedPort::new(noisy.clone(), 7).unwrap();
        let mut b = SimulatedPort::new(noisy, 7).unwrap();
        let ta = record(&mut a, &wf).unwrap();
        let tb = record(&mut b, &wf).unwrap();
        assert_eq!(ta, tb);
    }

    #[test]
    fn record_returns_partial_trace_on_port_error() {
        // third event violates compliance; the first two rows survive
        let wf = Waveform::new(
            vec![
                VoltageEvent::new(0, 0.0, Annotation::Plain),
                VoltageEvent::new(1, 0.1, Annotation::Plain),
                VoltageEvent::new(2, 20.0, Annotation::Plain),
            ],
            DEFAULT_TIMESTEP,
        )
        .unwrap();
        let mut port = quiet_port(0);
        let err = record(&mut port, &wf).unwrap_err();
        assert!(matches!(err.source, Error::ComplianceExceeded { .. }));
        assert_eq!(err.partial.len(), 2);
    }

    #[test]
    fn record_rejects_grid_mismatch() {
        let enc = Encoding {
            zero: 0.01,
            one: 0.2,
        };
        let wf = encode_bits(&enc, Bit::Zero, Bit::One, 1).unwrap();
        let mut port =
            SimulatedPort::with_timestep(DeviceParams::default().without_noise(), 0, 0.01).unwrap();
        let err = record(&mut port, &wf).unwrap_err();
        assert!(matches!(err.source, Error::GridMismatch { .. }));
    }

    #[test]
    fn replay_returns_recorded_currents() {
        let enc = Encoding {
            zero: 0.01,
            one: 0.2,
        };
        let wf = encode_bits(&enc, Bit::Zero, Bit::One, 1).unwrap();
        let mut port = quiet_port(0);
        let trace = record(&mut port, &wf).unwrap();
        let mut replay = ReplayPort::new(&trace);
        let replayed = record(&mut replay, &wf).unwrap();
        assert_eq!(replayed, trace);
    }

    #[test]
    fn replay_diverges_on_mismatched_voltage() {
        let enc = Encoding {
            zero: 0.01,
            one: 0.2,
        };
        let wf = encode_bits(&enc, Bit::Zero, Bit::One, 1).unwrap();
        let other = encode_bits(&enc, Bit::One, Bit::One, 1).unwrap();
        let mut port = quiet_port(0);
        let trace = record(&mut port, &wf).unwrap();
        let mut replay = ReplayPort::new(&trace);
        let err = record(&mut replay, &other).unwrap_err();
        match err.source {
            Error::ReplayDiverged { step, .. } => assert_eq!(step, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn replay_of_empty_trace_exhausts_immediately() {
        let trace = Trace::new(DEFAULT_TIMESTEP);
        let mut replay = ReplayPort::new(&trace);
        assert!(matches!(
            replay.set_level(0.0),
            Err(Error::ReplayExhausted(0))
        ));
    }
}
