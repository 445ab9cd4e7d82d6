//! Deterministic trace rendering: a two-panel SVG (voltage and current vs
//! time, read samples marked) and a terminal sparkline. All coordinates are
//! formatted with fixed precision, so identical traces give identical bytes.

use std::fmt::Write as _;

use memspike::{Annotation, Trace};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 86.0;
const RIGHT: f64 = 870.0;
const PANEL_TOP: [f64; 2] = [42.0, 312.0];
const PANEL_HEIGHT: f64 = 208.0;

struct Axis {
    min: f64,
    max: f64,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(min: f64, max: f64, lo: f64, hi: f64) -> Axis {
        Axis { min, max, lo, hi }
    }

    fn map(&self, value: f64) -> f64 {
        self.lo + (value - self.min) / (self.max - self.min) * (self.hi - self.lo)
    }
}

fn padded_range<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if !min.is_finite() || !max.is_finite() {
        return (0.0, 1.0);
    }
    if max - min < 1e-300 {
        let pad = max.abs().max(1e-12);
        return (min - pad, max + pad);
    }
    let pad = (max - min) * 0.08;
    (min - pad, max + pad)
}

fn polyline(out: &mut String, points: &[(f64, f64)], color: &str) {
    let _ = write!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points=""#
    );
    for (x, y) in points {
        let _ = write!(out, "{x:.2},{y:.2} ");
    }
    let _ = writeln!(out, r#""/>"#);
}

fn panel_frame(
    out: &mut String,
    top: f64,
    x_axis: &Axis,
    y_axis: &Axis,
    y_label: &str,
    amps: bool,
) {
    let bottom = top + PANEL_HEIGHT;
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT:.2}" y="{top:.2}" width="{:.2}" height="{PANEL_HEIGHT:.2}" fill="none" stroke="dimgray"/>"#,
        RIGHT - LEFT
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" transform="rotate(-90 {0:.2} {1:.2})" text-anchor="middle" font-size="13" fill="black">{y_label}</text>"#,
        24.0,
        top + PANEL_HEIGHT / 2.0
    );
    for tick in 0..=4 {
        let value = y_axis.min + (y_axis.max - y_axis.min) * tick as f64 / 4.0;
        let y = y_axis.map(value);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT:.2}" y2="{y:.2}" stroke="dimgray"/>"#,
            LEFT - 5.0
        );
        let label = if amps {
            format!("{value:.2e}")
        } else {
            format!("{value:.3}")
        };
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11" fill="black">{label}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
    }
    for tick in 0..=5 {
        let value = x_axis.min + (x_axis.max - x_axis.min) * tick as f64 / 5.0;
        let x = x_axis.map(value);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="dimgray"/>"#,
            bottom + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="11" fill="black">{value:.2}</text>"#,
            bottom + 18.0
        );
    }
}

/// Two stacked panels: held voltage (step plot) and sampled current, with
/// the read samples marked.
pub fn render_svg(trace: &Trace) -> String {
    let rows = trace.rows();
    let times: Vec<f64> = rows.iter().map(|r| trace.seconds(r.step)).collect();
    let t_end = times.last().copied().unwrap_or(0.0) + trace.timestep();
    let x_axis = Axis::new(0.0, t_end.max(trace.timestep()), LEFT, RIGHT);
    let (v_min, v_max) = padded_range(rows.iter().map(|r| r.volts));
    let (i_min, i_max) = padded_range(rows.iter().map(|r| r.current));
    let v_axis = Axis::new(v_min, v_max, PANEL_TOP[0] + PANEL_HEIGHT, PANEL_TOP[0]);
    let i_axis = Axis::new(i_min, i_max, PANEL_TOP[1] + PANEL_HEIGHT, PANEL_TOP[1]);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH:.0}" height="{HEIGHT:.0}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15" fill="black">trace: {} samples</text>"#,
        (LEFT + RIGHT) / 2.0,
        rows.len()
    );

    panel_frame(
        &mut out,
        PANEL_TOP[0],
        &x_axis,
        &v_axis,
        "voltage (V)",
        false,
    );
    panel_frame(
        &mut out,
        PANEL_TOP[1],
        &x_axis,
        &i_axis,
        "current (A)",
        true,
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13" fill="black">t (s)</text>"#,
        (LEFT + RIGHT) / 2.0,
        PANEL_TOP[1] + PANEL_HEIGHT + 38.0
    );

    // held level as a step plot
    let mut v_points = Vec::with_capacity(rows.len() * 2);
    for (index, row) in rows.iter().enumerate() {
        let x0 = x_axis.map(times[index]);
        let x1 = x_axis.map(times.get(index + 1).copied().unwrap_or(t_end));
        let y = v_axis.map(row.volts);
        v_points.push((x0, y));
        v_points.push((x1, y));
    }
    polyline(&mut out, &v_points, "steelblue");

    let i_points: Vec<(f64, f64)> = rows
        .iter()
        .enumerate()
        .map(|(index, row)| (x_axis.map(times[index]), i_axis.map(row.current)))
        .collect();
    polyline(&mut out, &i_points, "firebrick");

    // read markers: dashed time line plus a dot on the current panel
    for (index, row) in rows.iter().enumerate() {
        if row.annotation != Annotation::Read {
            continue;
        }
        let x = x_axis.map(times[index]);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
            PANEL_TOP[0],
            PANEL_TOP[1] + PANEL_HEIGHT
        );
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{:.2}" r="3.5" fill="firebrick" stroke="darkred"/>"#,
            i_axis.map(row.current)
        );
    }

    let _ = writeln!(out, "</svg>");
    out
}

const GLYPHS: [char; 8] = ['▁', '▂', '▃', '▄', '▅', '▆', '▇', '█'];

/// One-line sparkline; long series are bucketed to `max_width` columns by
/// keeping each bucket's largest-magnitude sample.
pub fn sparkline(values: &[f64], max_width: usize) -> String {
    if values.is_empty() {
        return String::new();
    }
    let bucket = values.len().div_ceil(max_width.max(1));
    let sampled: Vec<f64> = values
        .chunks(bucket)
        .map(|chunk| {
            chunk
                .iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()))
                .unwrap_or(0.0)
        })
        .collect();
    let min = sampled.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sampled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return GLYPHS[0].to_string().repeat(sampled.len());
    }
    sampled
        .iter()
        .map(|v| {
            let level = ((v - min) / (max - min) * 7.0).round() as usize;
            GLYPHS[level.min(7)]
        })
        .collect()
}
