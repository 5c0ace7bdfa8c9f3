//! `teleclone`: run telecloning protocols, sweep parameters, scan channel
//! entanglement, and cross-check against Monte Carlo.
//!
//! Exit codes: 0 success, 1 internal invariant violation, 2 argument error.

mod report;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use teleclone::{Error, Protocol64};

use crate::report::Rendered;

#[derive(Parser, Debug)]
#[command(name = "teleclone", version, about = "Continuous-variable reversible telecloning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one protocol and report simulated and closed-form fidelities.
    Run(RunArgs),
    /// Sweep r (or r_b for the asymmetric scheme) over a grid.
    Sweep(SweepArgs),
    /// Pairwise Duan sums and log-negativities of the 2M-mode channel.
    Structure(StructureArgs),
    /// Compare the exact engine with a seeded Monte Carlo estimate.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Clone)]
struct ProtocolArgs {
    /// Number of input replicas.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Number of clones.
    #[arg(long, default_value_t = 2)]
    m: usize,
    /// Squeezing of the channel EPR pair.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    r: f64,
    /// Use the asymmetric 1->2+1 scheme (requires N=1, M=2).
    #[arg(long)]
    asym: bool,
    /// Squeezing of the auxiliary EPR pair in the asymmetric scheme.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    rb: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mean_x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mean_y: f64,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    R,
    Rb,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// Parameter to sweep.
    #[arg(long, value_enum, default_value_t = SweepParam::R)]
    param: SweepParam,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    start: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    stop: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 21)]
    steps: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct StructureArgs {
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    r: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    #[arg(long, default_value_t = 1_000_000)]
    shots: u64,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Failure carrying the process exit code.
#[derive(Debug)]
enum Failure {
    Argument(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::Usage(_) => Failure::Argument(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl ProtocolArgs {
    fn protocol(&self) -> Result<Protocol64, Failure> {
        if self.asym {
            if self.n != 1 || self.m != 2 {
                return Err(Failure::Argument(format!(
                    "--asym requires --n 1 --m 2 (got --n {} --m {})",
                    self.n, self.m
                )));
            }
            Ok(Protocol64::Asymmetric { r: self.r, r_b: self.rb })
        } else {
            Ok(Protocol64::Symmetric { n: self.n, m: self.m, r: self.r })
        }
    }
}

fn grid(start: f64, stop: f64, steps: usize) -> Result<Vec<f64>, Failure> {
    if steps == 0 {
        return Err(Failure::Argument("--steps must be at least 1".into()));
    }
    if !start.is_finite() || !stop.is_finite() {
        return Err(Failure::Argument("grid bounds must be finite".into()));
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    let span = stop - start;
    Ok((0..steps).map(|i| start + span * i as f64 / (steps - 1) as f64).collect())
}

fn emit(rendered: Rendered, out: &OutputArgs) -> Result<(), Failure> {
    let text = match out.format {
        Format::Json => rendered.json,
        Format::Csv => rendered.csv,
    };
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Argument(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Internal(format!("writing stdout: {e}"))),
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => {
            let protocol = args.protocol.protocol()?;
            let result = protocol.run(args.protocol.mean_x, args.protocol.mean_y)?;
            emit(report::run(&protocol, &result)?, &args.output)
        }
        Command::Sweep(args) => {
            let points = grid(args.start, args.stop, args.steps)?;
            let base = args.protocol.protocol()?;
            let protocols = points
                .iter()
                .map(|&v| match (args.param, base) {
                    (SweepParam::R, Protocol64::Symmetric { n, m, .. }) => Ok(Protocol64::Symmetric { n, m, r: v }),
                    (SweepParam::R, Protocol64::Asymmetric { r_b, .. }) => Ok(Protocol64::Asymmetric { r: v, r_b }),
                    (SweepParam::Rb, Protocol64::Asymmetric { r, .. }) => Ok(Protocol64::Asymmetric { r, r_b: v }),
                    (SweepParam::Rb, Protocol64::Symmetric { .. }) => {
                        Err(Failure::Argument("--param rb requires --asym".into()))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let rendered = report::sweep(
                &base,
                args.param == SweepParam::Rb,
                &protocols,
                args.protocol.mean_x,
                args.protocol.mean_y,
            )?;
            emit(rendered, &args.output)
        }
        Command::Structure(args) => {
            let (rendered, all_pass) = report::structure(args.m, args.r)?;
            emit(rendered, &args.output)?;
            if all_pass {
                Ok(())
            } else {
                Err(Failure::Internal("channel entanglement structure check failed".into()))
            }
        }
        Command::Oracle(args) => {
            if args.shots == 0 {
                return Err(Failure::Argument("--shots must be at least 1".into()));
            }
            let protocol = args.protocol.protocol()?;
            let rendered =
                report::oracle(&protocol, args.protocol.mean_x, args.protocol.mean_y, args.shots, args.seed)?;
            emit(rendered, &args.output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Argument(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
