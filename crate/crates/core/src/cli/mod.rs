//! Command-line front end. Every command returns a [`RunReport`]; the binary
//! prints it as JSON (or CSV rows where a command has them) and maps library
//! errors onto exit codes.

mod commands;

pub use commands::{
    cmd_bound, cmd_check, cmd_gap_scan, cmd_robustness, cmd_simulate, cmd_witness, gap_scan_rows,
    robustness_scan, BoundMethod, GapRow, RobustnessScan, WitnessInput,
};

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;
pub const EXIT_DIMENSION: u8 = 4;
pub const EXIT_RESOURCE: u8 = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: serde_json::Value,
    pub results: serde_json::Value,
    pub timings: Timings,
    pub seed: u64,
    pub version: String,
}

impl RunReport {
    pub(crate) fn new(
        command: &str,
        inputs: serde_json::Value,
        results: serde_json::Value,
        seed: u64,
        started: std::time::Instant,
    ) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            results,
            timings: Timings {
                wall_seconds: started.elapsed().as_secs_f64(),
            },
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DimensionMismatch(_) => EXIT_DIMENSION,
        Error::GridDimension(_) | Error::ResourceGuard(_) => EXIT_RESOURCE,
        Error::StateIsPpt(_)
        | Error::FamilyMismatch(_)
        | Error::OffFormCoefficient { .. }
        | Error::NegativeCoefficient { .. }
        | Error::ComplexCoefficients(_)
        | Error::IdentityVerification(_)
        | Error::NullPostselection(_)
        | Error::NonConvergence { .. } => EXIT_PRECONDITION,
        Error::NotHermitian(_)
        | Error::NotUnitary(_)
        | Error::InvalidState { .. }
        | Error::InvalidPovm(_)
        | Error::ParameterOutOfRange(_)
        | Error::ShapeMismatch(_)
        | Error::Parse(_)
        | Error::Io(_) => EXIT_VALIDATION,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "swapsteer",
    version,
    about = "Swap-steering witnesses and SOHS bounds"
)]
pub struct Cli {
    /// Seed for every random choice made by the command.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report destination (for `witness`: the witness file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PPT and realignment tests of a state file.
    Check { state: PathBuf },
    /// Build a witness and write it to `--out`.
    Witness {
        #[command(subcommand)]
        family: WitnessCommand,
    },
    /// Evaluate a witness on the two-source network.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        rho1: PathBuf,
        /// Second source; `|phi+_d>` when absent.
        #[arg(long)]
        rho2: Option<PathBuf>,
        /// Use the witness's ideal strategy with `rho1` as the tested state.
        #[arg(long)]
        ideal: bool,
    },
    /// Numeric SOHS bound of a witness.
    Bound {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = BoundMethod::Seesaw)]
        method: BoundMethod,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, default_value_t = 48)]
        resolution: usize,
        /// Restrict Bob's deterministic response to this outcome.
        #[arg(long)]
        outcome: Option<usize>,
    },
    /// Quantum value versus SOHS bound of the CCN witness on `|phi+_d>`.
    GapScan {
        #[arg(long, default_value_t = 6)]
        dmax: usize,
    },
    /// Witness value under isotropic noise in the first source.
    Robustness {
        #[arg(long, value_enum, default_value_t = RobustFamily::Ccn)]
        family: RobustFamily,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RobustFamily {
    Ccn,
}

#[derive(Debug, Subcommand)]
pub enum WitnessCommand {
    /// From an NPT state.
    Npt {
        #[arg(long)]
        state: PathBuf,
    },
    /// From the aligning unitaries (identity when omitted).
    Ccn {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        u_prime: Option<PathBuf>,
        #[arg(long)]
        v_prime: Option<PathBuf>,
        /// Checks the aligned form of this state and predicts its value.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// From a Hermitian witness operator, or the NPT witness of a state.
    Universal {
        #[arg(long, conflicts_with = "state", required_unless_present = "state")]
        w: Option<PathBuf>,
        #[arg(long)]
        state: Option<PathBuf>,
        /// Also report diagnostics for the d^2 + 1 setting coefficient map.
        #[arg(long)]
        compat_map: bool,
    },
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Runs a parsed command and writes its output.
pub fn execute(cli: Cli) -> Result<RunReport> {
    let seed = cli.seed;
    let csv_rows: Option<String>;
    let report = match cli.command {
        Command::Check { state } => {
            csv_rows = None;
            cmd_check(&state, seed)?
        }
        Command::Witness { family } => {
            let Some(out) = cli.out.as_deref() else {
                return Err(Error::ParameterOutOfRange(
                    "witness needs --out for the witness file".into(),
                ));
            };
            let input = match family {
                WitnessCommand::Npt { state } => WitnessInput::Npt { state },
                WitnessCommand::Ccn {
                    d,
                    u_prime,
                    v_prime,
                    state,
                } => WitnessInput::Ccn {
                    d,
                    u_prime,
                    v_prime,
                    state,
                },
                WitnessCommand::Universal {
                    w,
                    state,
                    compat_map,
                } => WitnessInput::Universal {
                    w,
                    state,
                    compat_map,
                },
            };
            if cli.format == Format::Csv {
                return Err(Error::ParameterOutOfRange(
                    "witness output is JSON only".into(),
                ));
            }
            let report = cmd_witness(&input, out, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            return Ok(report);
        }
        Command::Simulate {
            spec,
            rho1,
            rho2,
            ideal,
        } => {
            csv_rows = None;
            cmd_simulate(&spec, &rho1, rho2.as_deref(), ideal, seed)?
        }
        Command::Bound {
            spec,
            method,
            restarts,
            resolution,
            outcome,
        } => {
            csv_rows = None;
            cmd_bound(&spec, method, restarts, resolution, outcome, seed)?
        }
        Command::GapScan { dmax } => {
            let report = cmd_gap_scan(dmax, seed)?;
            let rows: Vec<GapRow> = serde_json::from_value(report.results["rows"].clone())?;
            csv_rows = Some(commands::gap_csv(&rows)?);
            report
        }
        Command::Robustness { family, d, steps } => {
            let RobustFamily::Ccn = family;
            let report = cmd_robustness(d, steps, seed)?;
            let scan: RobustnessScan = serde_json::from_value(report.results.clone())?;
            csv_rows = Some(commands::robustness_csv(&scan)?);
            report
        }
    };
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        Format::Csv => csv_rows.ok_or_else(|| {
            Error::ParameterOutOfRange(format!("{} has no CSV output", report.command))
        })?,
    };
    match cli.out {
        Some(path) => write_text(&path, &text)?,
        None => print!("{text}{}", if text.ends_with('\n') { "" } else { "\n" }),
    }
    Ok(report)
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
        }
    };
    match execute(cli) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
