#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use clap::{Parser, Subcommand};
use commands::Failure;
use config::{parse_entries, RunConfig};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const THREADS_VAR: &str = "GEVREY_NSE_THREADS";

#[derive(Parser)]
#[command(name = "gevrey-nse", version, about = "Gevrey-class Navier-Stokes simulator and inequality verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the `output_dir` key.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the flow and record diagnostics.
    Simulate,
    /// Evolve the flow and fit its time-averaged spectrum.
    Spectrum,
    /// Solve the mild formulation by Picard iteration on the guaranteed interval.
    Picard,
    /// Estimate the analyticity radius of the evolved field.
    Radius,
    /// Run randomized inequality checks.
    Verify {
        /// semigroup, appendix, lemmas or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Regenerate the constants file.
    Calibrate,
    /// List configuration keys with defaults.
    Keys,
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let (mut entries, base) = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("config file {}: {e}", path.display())))?;
            let entries = parse_entries(&text).map_err(|e| Failure::Config(e.0))?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (entries, base)
        }
        None => (BTreeMap::new(), PathBuf::from(".")),
    };
    if let Some(seed) = cli.seed {
        entries.insert("seed".into(), seed.to_string());
    }
    let mut cfg = RunConfig::from_entries(&entries, &base).map_err(|e| Failure::Config(e.0))?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("{THREADS_VAR}: expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("{THREADS_VAR}: {e}")))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    if let Command::Keys = cli.command {
        print!("{}", config::key_table());
        return Ok(());
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Spectrum => commands::spectrum(&cfg),
        Command::Picard => commands::picard(&cfg),
        Command::Radius => commands::radius(&cfg),
        Command::Verify { suite } => commands::verify(&cfg, suite),
        Command::Calibrate => commands::run_calibration(&cfg, cli.seed),
        Command::Keys => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
