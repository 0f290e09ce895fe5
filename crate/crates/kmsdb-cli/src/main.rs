//! `kmsdb` command-line driver: builds detailed-balanced dynamics on models,
//! verifies them, sweeps spectral gaps and simulates mixing, writing
//! versioned JSON/CSV reports.

mod commands;
mod resolve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Version tag written into every report.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "kmsdb", version, about = "Exactly detailed-balanced quantum Markov dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a construction on a model and check all residuals.
    Verify(ModelArgs),
    /// Emit the Kraus operators and superoperator of a construction.
    Construct(ModelArgs),
    /// Spectral gaps over a grid of inverse temperatures.
    GapSweep(SweepArgs),
    /// Distance-to-Gibbs curves from canonical initial states.
    Mix(MixArgs),
    /// Cross-check suites: time vs frequency domain, classical reductions,
    /// Fourier pairs.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Directory for report files (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Residual tolerance used for pass/fail decisions.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for random models (`random-d<N>`) and oracle instances.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Model descriptor: inline JSON, a path to a JSON file, `ising-L<n>`,
    /// `heisenberg-L<n>` or `random-d<n>`.
    #[arg(long)]
    pub model: String,
    /// davies, coherent, oft, two-sided or interpolated.
    #[arg(long, default_value = "coherent")]
    pub construction: String,
    /// Profile name, custom-profile JSON (inline or path), or `default`.
    #[arg(long, default_value = "default")]
    pub profile: String,
    /// Energy uncertainty σ of the oft, two-sided and interpolated constructions.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Discrete-time completion: exact, taylor:N or recursive:L.
    #[arg(long)]
    pub discrete: Option<String>,
    /// Jump set: default, pauli, pauli-z, hopping or none.
    #[arg(long, default_value = "default")]
    pub jumps: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Inverse-temperature grid `start:stop:step` (inclusive).
    #[arg(long, default_value = "0:1:0.05")]
    pub betas: String,
    /// Also estimate the continuous-time mixing time at every β.
    #[arg(long)]
    pub mixing: bool,
    /// Worker threads; output order is the grid order regardless.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug, Clone)]
pub struct MixArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Time grid `start:stop:step` (inclusive); channels use integer steps
    /// up to `stop`.
    #[arg(long, default_value = "0:20:0.5")]
    pub times: String,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure of a run, reported as a one-line JSON record on stderr.
#[derive(Debug)]
pub struct CliError {
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: &str, message: impl Into<String>) -> Self {
        CliError { kind: kind.into(), message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new("usage", message)
    }

    fn record(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind, "message": self.message } }).to_string()
    }
}

impl From<kmsdb::Error> for CliError {
    fn from(e: kmsdb::Error) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}

/// Whether the report's checks passed (exit 0) or not (exit 1).
pub enum Verdict {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", CliError::usage(first).record());
            return ExitCode::from(2);
        }
    };
    let result = match &cli.command {
        Command::Verify(a) => commands::verify(a),
        Command::Construct(a) => commands::construct(a),
        Command::GapSweep(a) => commands::gap_sweep(a),
        Command::Mix(a) => commands::mix(a),
        Command::Oracle(a) => commands::oracle(a),
    };
    match result {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(2)
        }
    }
}
