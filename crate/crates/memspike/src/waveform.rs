//! Timed voltage-event sequences on the sampling grid.
//!
//! Time is held as integer step counts and converted to seconds only at I/O,
//! so events never drift off the grid.

use std::fmt;

use crate::error::{Error, Result};

/// Sampling grid step, seconds.
pub const DEFAULT_TIMESTEP: f64 = 0.02;

/// Logical bit carried by a voltage level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn from_char(c: char) -> Result<Bit> {
        match c {
            '0' => Ok(Bit::Zero),
            '1' => Ok(Bit::One),
            other => Err(Error::InvalidBit(other.to_string())),
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn flip(self) -> Bit {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }
}

impl From<bool> for Bit {
    fn from(b: bool) -> Bit {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }
}

impl fmt::Display for Bit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Marker attached to an event and to the trace row sampled at it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Annotation {
    Bit1,
    Bit2,
    Read,
    Zeroing,
    Plain,
}

impl Annotation {
    pub fn as_str(self) -> &'static str {
        match self {
            Annotation::Bit1 => "bit1",
            Annotation::Bit2 => "bit2",
            Annotation::Read => "read",
            Annotation::Zeroing => "zeroing",
            Annotation::Plain => "plain",
        }
    }

    pub fn parse(s: &str) -> Option<Annotation> {
        match s {
            "bit1" => Some(Annotation::Bit1),
            "bit2" => Some(Annotation::Bit2),
            "read" => Some(Annotation::Read),
            "zeroing" => Some(Annotation::Zeroing),
            "plain" => Some(Annotation::Plain),
            _ => None,
        }
    }
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bit-to-voltage map used by a gate encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Encoding {
    /// Level sent for a logical 0, volts.
    pub zero: f64,
    /// Level sent for a logical 1, volts.
    pub one: f64,
}

impl Encoding {
    pub fn level(&self, bit: Bit) -> f64 {
        match bit {
            Bit::Zero => self.zero,
            Bit::One => self.one,
        }
    }
}

/// A source level change scheduled on the sampling grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageEvent {
    pub step: u64,
    pub volts: f64,
    pub annotation: Annotation,
}

impl VoltageEvent {
    pub fn new(step: u64, volts: f64, annotation: Annotation) -> Self {
        VoltageEvent {
            step,
            volts,
            annotation,
        }
    }
}

/// An ordered sequence of held voltage levels, starting at step 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    events: Vec<VoltageEvent>,
    timestep: f64,
}

impl Waveform {
    pub fn new(events: Vec<VoltageEvent>, timestep: f64) -> Result<Self> {
        if !timestep.is_finite() || timestep <= 0.0 {
            return Err(Error::NonPositiveStep(timestep));
        }
        if events.is_empty() || events[0].step != 0 {
            return Err(Error::InvalidWaveform);
        }
        for pair in events.windows(2) {
            if pair[1].step <= pair[0].step {
                return Err(Error::InvalidWaveform);
            }
        }
        if events.iter().any(|e| !e.volts.is_finite()) {
            return Err(Error::InvalidWaveform);
        }
        Ok(Waveform { events, timestep })
    }

    pub fn events(&self) -> &[VoltageEvent] {
        &self.events
    }

    pub fn timestep(&self) -> f64 {
        self.timestep
    }

    pub fn last_step(&self) -> u64 {
        self.events.last().expect("waveform is non-empty").step
    }

    pub fn seconds(&self, step: u64) -> f64 {
        step as f64 * self.timestep
    }

    /// Step of the event annotated `read`, if any.
    pub fn read_step(&self) -> Option<u64> {
        self.events
            .iter()
            .find(|e| e.annotation == Annotation::Read)
            .map(|e| e.step)
    }

    /// Serialize to the trace CSV schema, one row per grid step with the
    /// held level and an empty current column.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", crate::trace::TRACE_CSV_HEADER)?;
        let mut next_event = 0;
        let mut level = 0.0;
        for step in 0..=self.last_step() {
            let mut annotation = Annotation::Plain;
            if let Some(event) = self.events.get(next_event) {
                if event.step == step {
                    level = event.volts;
                    annotation = event.annotation;
                    next_event += 1;
                }
            }
            writeln!(
                out,
                "{},{:.6},{:.11e},,{}",
                step,
                self.seconds(step),
                level,
                annotation
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to Vec");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Two bits as time-separated voltage levels: `v(b1)` one step after a 0 V
/// baseline, `v(b2)` carrying the `read` marker `gap_steps` later.
///
/// With `gap_steps > 1` the first bit is a single-step pulse and the line
/// idles at 0 V until the second bit arrives, which is what makes late
/// second bits miss the memory window.
pub fn encode_bits(encoding: &Encoding, b1: Bit, b2: Bit, gap_steps: u64) -> Result<Waveform> {
    if gap_steps == 0 {
        return Err(Error::ZeroGap);
    }
    let mut events = vec![
        VoltageEvent::new(0, 0.0, Annotation::Plain),
        VoltageEvent::new(1, encoding.level(b1), Annotation::Bit1),
    ];
    if gap_steps > 1 {
        events.push(VoltageEvent::new(2, 0.0, Annotation::Plain));
    }
    events.push(VoltageEvent::new(
        1 + gap_steps,
        encoding.level(b2),
        Annotation::Read,
    ));
    Waveform::new(events, DEFAULT_TIMESTEP)
}

/// Repeating 0-to-amplitude square wave. `shortened_cycle` (1-based) picks a
/// cycle whose high interval lasts exactly one step.
pub fn square_wave(
    amplitude: f64,
    high_steps: u64,
    low_steps: u64,
    cycles: usize,
    shortened_cycle: Option<usize>,
) -> Result<Waveform> {
    if cycles == 0 {
        return Err(Error::ZeroCycles);
    }
    if high_steps == 0 || low_steps == 0 {
        return Err(Error::EmptyHold);
    }
    if let Some(index) = shortened_cycle {
        if index == 0 || index > cycles {
            return Err(Error::ShortenedOutOfRange { index, cycles });
        }
    }
    let mut events = vec![VoltageEvent::new(0, 0.0, Annotation::Plain)];
    let mut step = 1;
    for cycle in 1..=cycles {
        let high = if shortened_cycle == Some(cycle) {
            1
        } else {
            high_steps
        };
        events.push(VoltageEvent::new(step, amplitude, Annotation::Plain));
        step += high;
        events.push(VoltageEvent::new(step, 0.0, Annotation::Plain));
        step += low_steps;
    }
    Waveform::new(events, DEFAULT_TIMESTEP)
}

/// For each `v_a`, the two orderings of a one-step-apart level pair:
/// `0 -> v_a -> v_b` and `0 -> v_b -> v_a`. Requires `v_a <= v_b`.
pub fn pair_sweep(v_b: f64, v_a_values: &[f64]) -> Result<Vec<(Waveform, Waveform)>> {
    v_a_values
        .iter()
        .map(|&v_a| {
            if v_a > v_b {
                return Err(Error::SweepLevelAboveFixed { v_a, v_b });
            }
            let ascending = Waveform::new(
                vec![
                    VoltageEvent::new(0, 0.0, Annotation::Plain),
                    VoltageEvent::new(1, v_a, Annotation::Bit1),
                    VoltageEvent::new(2, v_b, Annotation::Bit2),
                ],
                DEFAULT_TIMESTEP,
            )?;
            let descending = Waveform::new(
                vec![
                    VoltageEvent::new(0, 0.0, Annotation::Plain),
                    VoltageEvent::new(1, v_b, Annotation::Bit1),
                    VoltageEvent::new(2, v_a, Annotation::Bit2),
                ],
                DEFAULT_TIMESTEP,
            )?;
            Ok((ascending, descending))
        })
        .collect()
}
