//! Command-line front end: run gates, verify truth tables, calibrate
//! thresholds, reproduce the scripted experiments and plot traces.

mod config;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use memspike::experiment::{
    default_va_grid, noncommutative_sweep, or_demo, square_wave_demo, xor_demo, xor_repro,
    NoncommutativeSweep, SquareWaveDemo, TableDemo, XorRepro,
};
use memspike::{
    calibrate_threshold, run_gate, run_not, truth_table, Bit, DeviceParams, Error, GateResult,
    SimulatedPort, Trace, TruthTableReport,
};

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "memspike",
    version,
    about = "Spiking-memristor logic gate simulator"
)]
struct Cli {
    /// Seed for the device noise generator.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Disable measurement noise.
    #[arg(long, global = true)]
    no_noise: bool,

    /// TOML file overriding device parameters and gate constants.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write the recorded trace as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    trace: Option<PathBuf>,

    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one gate operation and print the decoded bit.
    Run {
        /// Gate name: or, xor, not, or one defined in the config.
        #[arg(long)]
        gate: String,
        /// Input bits, e.g. `01` (a single bit for `not`).
        #[arg(long)]
        bits: String,
    },
    /// Run every input row of a gate's truth table.
    TruthTable {
        #[arg(long)]
        gate: String,
        /// How many times to repeat the whole table.
        #[arg(long, default_value_t = 1)]
        repeat: usize,
    },
    /// Find the threshold separating the '0' and '1' read currents.
    Calibrate {
        #[arg(long)]
        gate: String,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Run a scripted experiment and write its trace.
    Experiment {
        /// square-wave, noncommutative, or-demo, xor-demo or xor-repro.
        name: String,
    },
    /// Render a trace CSV as a two-panel SVG or a terminal sparkline.
    Plot {
        /// Trace CSV produced by the other commands.
        trace_file: PathBuf,
        /// Output path (default: the input with an .svg extension).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print a sparkline instead of writing an SVG.
        #[arg(long)]
        ascii: bool,
    },
}

enum CliError {
    Usage(String),
    Failure(String),
}

/// Bad inputs exit 2; gate, calibration and i/o failures exit 1.
fn classify(err: Error) -> CliError {
    match err {
        Error::UnknownGate(_)
        | Error::WrongArity { .. }
        | Error::InvalidBit(_)
        | Error::InvalidGate { .. }
        | Error::ZeroRepeats
        | Error::ZeroGap => CliError::Usage(err.to_string()),
        other => CliError::Failure(other.to_string()),
    }
}

struct Context {
    params: DeviceParams,
    seed: u64,
    json: bool,
    trace: Option<PathBuf>,
    config: FileConfig,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match FileConfig::load(cli.config.as_deref()) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    let context = Context {
        params: config.device_params(cli.no_noise),
        seed: cli.seed,
        json: cli.json,
        trace: cli.trace,
        config,
    };
    let result = match cli.command {
        Command::Run { gate, bits } => cmd_run(&context, &gate, &bits),
        Command::TruthTable { gate, repeat } => cmd_truth_table(&context, &gate, repeat),
        Command::Calibrate { gate, trials } => cmd_calibrate(&context, &gate, trials),
        Command::Experiment { name } => cmd_experiment(&context, &name),
        Command::Plot {
            trace_file,
            out,
            ascii,
        } => cmd_plot(&context, &trace_file, out, ascii),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn save_trace(trace: &Trace, path: &Path) -> Result<(), CliError> {
    trace.save(path).map_err(classify)
}

fn cmd_run(context: &Context, gate: &str, bits: &str) -> Result<(), CliError> {
    let spec = context.config.gate(gate).map_err(classify)?;
    let parsed: Vec<Bit> = bits
        .chars()
        .map(Bit::from_char)
        .collect::<Result<_, _>>()
        .map_err(classify)?;
    if parsed.len() != spec.arity() {
        return Err(CliError::Usage(format!(
            "gate `{gate}` takes {} input bit(s), got `{bits}`",
            spec.arity()
        )));
    }
    let mut port = SimulatedPort::new(context.params.clone(), context.seed).map_err(classify)?;
    let result: GateResult = match parsed.as_slice() {
        [a] => run_not(&mut port, &spec, *a),
        [a, b] => run_gate(&mut port, &spec, *a, *b),
        _ => unreachable!("arity checked above"),
    }
    .map_err(classify)?;
    if let Some(path) = &context.trace {
        save_trace(&result.trace, path)?;
    }
    if context.json {
        println!(
            "{}",
            json!({
                "command": "run",
                "gate": spec.name,
                "bits": bits,
                "output": result.output.as_u8(),
                "i_read_A": result.i_read,
                "threshold_A": spec.threshold,
                "margin": result.margin,
                "trace_path": context.trace.as_ref().map(|p| p.display().to_string()),
            })
        );
    } else {
        println!("{}", result.output);
    }
    Ok(())
}

fn cmd_truth_table(context: &Context, gate: &str, repeat: usize) -> Result<(), CliError> {
    let spec = context.config.gate(gate).map_err(classify)?;
    let report: TruthTableReport =
        truth_table(&context.params, context.seed, &spec, repeat).map_err(classify)?;
    if let Some(path) = &context.trace {
        let joined = Trace::concat(&report.traces).map_err(classify)?;
        save_trace(&joined, path)?;
    }
    if context.json {
        let rows: Vec<_> = report
            .rows
            .iter()
            .map(|row| {
                json!({
                    "repeat": row.repeat + 1,
                    "inputs": row.inputs.to_string(),
                    "expected": row.expected.as_u8(),
                    "output": row.output.as_u8(),
                    "i_read_A": row.i_read,
                    "margin": row.margin,
                    "pass": row.correct(),
                })
            })
            .collect();
        let worst = report.worst();
        println!(
            "{}",
            json!({
                "command": "truth-table",
                "gate": report.gate,
                "repeats": report.repeats,
                "threshold_A": spec.threshold,
                "rows": rows,
                "correct": report.correct,
                "total": report.total(),
                "worst_margin": worst.margin,
                "worst_inputs": worst.inputs.to_string(),
                "pass": report.all_correct(),
            })
        );
    } else {
        println!(
            "gate={} repeats={} seed={}",
            report.gate, report.repeats, context.seed
        );
        println!("rep  inputs  expected  output  i_read_A       margin    status");
        for row in &report.rows {
            println!(
                "{:>3}  {:<6}  {:<8}  {:<6}  {:>13.6e}  {:>+8.4}  {}",
                row.repeat + 1,
                row.inputs.to_string(),
                row.expected.as_u8(),
                row.output.as_u8(),
                row.i_read,
                row.margin,
                if row.correct() { "ok" } else { "FAIL" }
            );
        }
        let worst = report.worst();
        println!(
            "correct={}/{} worst_margin={:+.4} worst_inputs={} worst_rep={}",
            report.correct,
            report.total(),
            worst.margin,
            worst.inputs,
            worst.repeat + 1
        );
    }
    if report.all_correct() {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "{} of {} rows decoded incorrectly",
            report.total() - report.correct,
            report.total()
        )))
    }
}

fn cmd_calibrate(context: &Context, gate: &str, trials: usize) -> Result<(), CliError> {
    let spec = context.config.gate(gate).map_err(classify)?;
    let calibration = calibrate_threshold(&context.params, &spec, trials).map_err(classify)?;
    if context.json {
        println!(
            "{}",
            json!({
                "command": "calibrate",
                "gate": spec.name,
                "trials": trials,
                "threshold_A": calibration.threshold,
                "zero_max_A": calibration.zero_max,
                "one_min_A": calibration.one_min,
                "shipped_threshold_A": spec.threshold,
            })
        );
    } else {
        println!("gate={} trials={trials}", spec.name);
        println!("zero_max_A={:.6e}", calibration.zero_max);
        println!("one_min_A={:.6e}", calibration.one_min);
        println!("threshold_A={:.6e}", calibration.threshold);
        println!("shipped_threshold_A={:.6e}", spec.threshold);
    }
    Ok(())
}

enum ExperimentOutcome {
    SquareWave(SquareWaveDemo),
    Noncommutative(NoncommutativeSweep),
    Demo(TableDemo),
    Repro(XorRepro),
}

fn cmd_experiment(context: &Context, name: &str) -> Result<(), CliError> {
    let mut port = SimulatedPort::new(context.params.clone(), context.seed).map_err(classify)?;
    let outcome = match name {
        "square-wave" => {
            ExperimentOutcome::SquareWave(square_wave_demo(&mut port).map_err(classify)?)
        }
        "noncommutative" => {
            let v_b = 0.12;
            ExperimentOutcome::Noncommutative(
                noncommutative_sweep(&mut port, v_b, &default_va_grid(v_b)).map_err(classify)?,
            )
        }
        "or-demo" => ExperimentOutcome::Demo(or_demo(&mut port).map_err(classify)?),
        "xor-demo" => ExperimentOutcome::Demo(xor_demo(&mut port).map_err(classify)?),
        "xor-repro" => ExperimentOutcome::Repro(xor_repro(&mut port, 7).map_err(classify)?),
        other => {
            return Err(CliError::Usage(format!("unknown experiment `{other}`")));
        }
    };
    let (trace, pass, report, summary) = match &outcome {
        ExperimentOutcome::SquareWave(demo) => (
            &demo.trace,
            demo.memory_effect_holds(),
            demo.report(),
            json!({
                "spikes": demo
                    .spikes
                    .iter()
                    .map(|s| json!({
                        "cycle": s.cycle,
                        "magnitude_A": s.magnitude,
                        "shortened": s.shortened,
                    }))
                    .collect::<Vec<_>>(),
                "shortened_ratio": demo.shortened_ratio(),
            }),
        ),
        ExperimentOutcome::Noncommutative(sweep) => (
            &sweep.trace,
            sweep.holds(&context.params),
            sweep.report(&context.params),
            json!({
                "v_b_V": sweep.v_b,
                "rows": sweep
                    .rows
                    .iter()
                    .map(|row| json!({
                        "v_a_V": row.v_a,
                        "S1_A": row.s1,
                        "T1_A": row.t1,
                        "T2_A": row.t2,
                        "S2_A": row.s2,
                        "gap_A": row.ordering_gap(),
                    }))
                    .collect::<Vec<_>>(),
            }),
        ),
        ExperimentOutcome::Demo(demo) => (
            &demo.trace,
            demo.all_correct(),
            demo.report(),
            json!({
                "gate": demo.gate,
                "threshold_A": demo.threshold,
                "ones": demo.ones(),
                "reads": demo
                    .reads
                    .iter()
                    .map(|read| json!({
                        "inputs": format!("{}{}", read.inputs.0, read.inputs.1),
                        "i_read_A": read.i_read,
                        "output": read.output.as_u8(),
                        "expected": read.expected.as_u8(),
                    }))
                    .collect::<Vec<_>>(),
            }),
        ),
        ExperimentOutcome::Repro(repro) => (
            &repro.trace,
            repro.all_correct(),
            repro.report(),
            json!({
                "runs": repro.runs,
                "correct": repro.correct,
                "total": repro.total(),
                "worst_margin": repro.worst().margin,
            }),
        ),
    };
    let path = context
        .trace
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    save_trace(trace, &path)?;
    if context.json {
        println!(
            "{}",
            json!({
                "command": "experiment",
                "name": name,
                "pass": pass,
                "trace_path": path.display().to_string(),
                "summary": summary,
            })
        );
    } else {
        print!("{report}");
        println!("trace={}", path.display());
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "experiment {name} checks failed"
        )))
    }
}

fn cmd_plot(
    context: &Context,
    trace_file: &Path,
    out: Option<PathBuf>,
    ascii: bool,
) -> Result<(), CliError> {
    let trace = Trace::load(trace_file).map_err(classify)?;
    if trace.is_empty() {
        return Err(CliError::Failure(format!(
            "trace {} has no rows",
            trace_file.display()
        )));
    }
    if ascii {
        let volts: Vec<f64> = trace.rows().iter().map(|r| r.volts).collect();
        let currents: Vec<f64> = trace.rows().iter().map(|r| r.current).collect();
        let v_line = plot::sparkline(&volts, 100);
        let i_line = plot::sparkline(&currents, 100);
        if context.json {
            println!(
                "{}",
                json!({
                    "command": "plot",
                    "ascii": true,
                    "rows": trace.len(),
                    "v": v_line,
                    "i": i_line,
                })
            );
        } else {
            println!("v {v_line}");
            println!("i {i_line}");
        }
        return Ok(());
    }
    let svg = plot::render_svg(&trace);
    let out = out.unwrap_or_else(|| trace_file.with_extension("svg"));
    std::fs::write(&out, svg)
        .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", out.display())))?;
    if context.json {
        println!(
            "{}",
            json!({
                "command": "plot",
                "ascii": false,
                "rows": trace.len(),
                "out": out.display().to_string(),
            })
        );
    } else {
        println!("wrote {}", out.display());
    }
    Ok(())
}
