//! Command-line driver for the five canonical experiments.
//!
//! Exit codes: 0 on success, 2 when a configured tolerance or monotonicity
//! requirement fails, 3 on numerical failures, 1 for configuration/IO
//! problems.

use clap::{Parser, Subcommand};
use plate_spectra::config::ExperimentConfig;
use plate_spectra::error::Error;
use plate_spectra::experiments;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "plate-lab",
    about = "Spectral experiments for hinged plates over periodically oscillating boundaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path for the table (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for assembly sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// FEM limit spectrum against the 1D mode oracle.
    LimitSpectrum,
    /// ε-sweeps across the sub/critical/supercritical regimes.
    Trichotomy,
    /// Strange term γ by both formulas plus the truncated-strip oracle.
    Cell,
    /// Galerkin refinement study of the hinged limit problem.
    Convergence,
    /// Boundary-layer distances along the critical sweep.
    Unfold,
}

fn run() -> Result<experiments::Report, Error> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // ignore the error when a pool already exists (e.g. under tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    let report = match cli.command {
        Command::LimitSpectrum => experiments::run_limit_spectrum(&cfg)?,
        Command::Trichotomy => experiments::run_trichotomy_report(&cfg)?,
        Command::Cell => experiments::run_cell(&cfg)?,
        Command::Convergence => experiments::run_convergence(&cfg)?,
        Command::Unfold => experiments::run_unfold(&cfg)?,
    };

    match &cli.out {
        Some(path) => std::fs::write(path, &report.rendered)
            .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", report.rendered),
    }
    eprintln!("{}", report.summary);
    Ok(report)
}

fn main() -> ExitCode {
    match run() {
        Ok(report) if report.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(2),
        Err(Error::NumericalFailure(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
