//! Sampled (step, voltage, current, annotation) series and their CSV form.
//!
//! CSV schema: `step,t_s,v_V,i_A,annotation`. Voltages and currents are
//! written with 12 significant digits, which round-trips well below every
//! tolerance used by the gates.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::waveform::{Annotation, DEFAULT_TIMESTEP};

pub const TRACE_CSV_HEADER: &str = "step,t_s,v_V,i_A,annotation";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: u64,
    pub volts: f64,
    pub current: f64,
    pub annotation: Annotation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    timestep: f64,
    rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new(timestep: f64) -> Self {
        Trace {
            timestep,
            rows: Vec::new(),
        }
    }

    /// Append a row; steps must be strictly increasing.
    pub fn push(&mut self, row: TraceRow) {
        if let Some(last) = self.rows.last() {
            assert!(row.step > last.step, "trace steps must strictly increase");
        }
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn timestep(&self) -> f64 {
        self.timestep
    }

    pub fn seconds(&self, step: u64) -> f64 {
        step as f64 * self.timestep
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows annotated `read`, in order.
    pub fn reads(&self) -> impl Iterator<Item = &TraceRow> {
        self.rows
            .iter()
            .filter(|r| r.annotation == Annotation::Read)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{TRACE_CSV_HEADER}")?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{:.6},{:.11e},{:.11e},{}",
                row.step,
                self.seconds(row.step),
                row.volts,
                row.current,
                row.annotation
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to Vec");
        String::from_utf8(buf).expect("csv is ascii")
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Trace> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => {
                return Err(Error::TraceParse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        };
        if header.trim() != TRACE_CSV_HEADER {
            return Err(Error::TraceParse {
                line: 1,
                message: format!("expected header `{TRACE_CSV_HEADER}`, got `{header}`"),
            });
        }
        let mut rows: Vec<TraceRow> = Vec::new();
        let mut timestep = None;
        for (idx, line) in lines {
            let line = line?;
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let parse = |message: String| Error::TraceParse {
                line: lineno,
                message,
            };
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 5 {
                return Err(parse(format!("expected 5 fields, got {}", fields.len())));
            }
            let step: u64 = fields[0]
                .parse()
                .map_err(|e| parse(format!("bad step: {e}")))?;
            let t: f64 = fields[1]
                .parse()
                .map_err(|e| parse(format!("bad t_s: {e}")))?;
            let volts: f64 = fields[2]
                .parse()
                .map_err(|e| parse(format!("bad v_V: {e}")))?;
            let current: f64 = fields[3]
                .parse()
                .map_err(|e| parse(format!("bad i_A: {e}")))?;
            let annotation = Annotation::parse(fields[4])
                .ok_or_else(|| parse(format!("unknown annotation `{}`", fields[4])))?;
            if let Some(last) = rows.last() {
                if step <= last.step {
                    return Err(parse("steps must strictly increase".into()));
                }
            }
            if timestep.is_none() && step > 0 {
                timestep = Some(t / step as f64);
            }
            rows.push(TraceRow {
                step,
                volts,
                current,
                annotation,
            });
        }
        Ok(Trace {
            timestep: timestep.unwrap_or(DEFAULT_TIMESTEP),
            rows,
        })
    }

    pub fn from_csv_str(s: &str) -> Result<Trace> {
        Trace::read_csv(s.as_bytes())
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut file = File::create(path)?;
        self.write_csv(&mut file)?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Trace> {
        Trace::read_csv(BufReader::new(File::open(path)?))
    }

    /// Join traces back to back, renumbering steps so they keep increasing.
    pub fn concat(traces: &[Trace]) -> Result<Trace> {
        let timestep = traces
            .first()
            .map(|t| t.timestep)
            .unwrap_or(DEFAULT_TIMESTEP);
        let mut joined = Trace::new(timestep);
        let mut offset = 0;
        for trace in traces {
            if (trace.timestep - timestep).abs() > 1e-12 {
                return Err(Error::GridMismatch {
                    waveform: trace.timestep,
                    port: timestep,
                });
            }
            for row in &trace.rows {
                joined.push(TraceRow {
                    step: row.step + offset,
                    ..row.clone()
                });
            }
            if let Some(last) = trace.rows.last() {
                offset += last.step + 1;
            }
        }
        Ok(joined)
    }
}
