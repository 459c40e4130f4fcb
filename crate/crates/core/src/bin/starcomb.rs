use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use starcomb::config::RunConfig;
use starcomb::run::{execute, Operation, RunError};

/// Weighted cut-and-project Dirac combs: generation, autocorrelation, and
/// pure-point diffraction, with every closed form checked against an
/// independent estimator.
#[derive(Parser)]
#[command(name = "starcomb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; overrides `thresholds.workers` from the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the scheme, weight, and decoration; writes validate.json.
    Validate(CommonArgs),
    /// Generate the weighted comb on the largest box; writes comb.csv.
    Generate(CommonArgs),
    /// Closed-form density against box averages; writes density.{csv,json}.
    Density(CommonArgs),
    /// Closed-form autocorrelation table; writes autocorr.{csv,json}.
    Autocorr(CommonArgs),
    /// Pure-point diffraction peaks; writes peaks.csv and diffract.json.
    Diffract(CommonArgs),
    /// Fourier averages at and off the closed peaks over the box sequence.
    FourierBohr(CommonArgs),
    /// Statistical almost periods of the comb; writes almost_periods.{csv,json}.
    AlmostPeriods(CommonArgs),
    /// Character-response injectivity report; writes injectivity.json.
    Injectivity(CommonArgs),
    /// Closed-vs-estimator battery; writes compare.json, exits 4 on a failed line.
    Compare(CommonArgs),
}

impl Command {
    fn split(&self) -> (Operation, &CommonArgs) {
        match self {
            Command::Validate(a) => (Operation::Validate, a),
            Command::Generate(a) => (Operation::Generate, a),
            Command::Density(a) => (Operation::Density, a),
            Command::Autocorr(a) => (Operation::Autocorr, a),
            Command::Diffract(a) => (Operation::Diffract, a),
            Command::FourierBohr(a) => (Operation::FourierBohr, a),
            Command::AlmostPeriods(a) => (Operation::AlmostPeriods, a),
            Command::Injectivity(a) => (Operation::Injectivity, a),
            Command::Compare(a) => (Operation::Compare, a),
        }
    }
}

fn run(op: Operation, args: &CommonArgs) -> Result<ExitCode, RunError> {
    let mut cfg = RunConfig::from_path(&args.config)?;
    if let Some(w) = args.workers {
        cfg.thresholds.workers = w;
    }
    let out_dir = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let value = execute(op, &cfg, &out_dir)?;
    print_summary(&value);
    if op == Operation::Compare && value["all_pass"] == serde_json::json!(false) {
        return Ok(ExitCode::from(4));
    }
    Ok(ExitCode::SUCCESS)
}

/// Print the stdout summary, staying quiet if the pipe closed early.
fn print_summary(value: &serde_json::Value) {
    use std::io::Write;
    let text = serde_json::to_string_pretty(value).expect("summary serializes");
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (op, args) = cli.command.split();
    match run(op, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.error_json());
            ExitCode::from(e.exit_code())
        }
    }
}
