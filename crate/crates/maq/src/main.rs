use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use maq::{run_command, CliError, Command, ExperimentConfig};

/// Numerical checks for quaternionic Monge–Ampère structures and flat
/// surfaces in hyperbolic space.
#[derive(Debug, Parser)]
#[command(name = "maq", version)]
struct Args {
    command: Command,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for `report.json` and CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for every random suite; overrides the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: &Args) -> Result<bool, CliError> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let out = args.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let report = run_command(args.command, &cfg, seed, &out)?;
    for c in &report.checks {
        println!("{:<4} {:<32} {:.6e} {} {:e}", c.status, c.name, c.value, c.comparison, c.tolerance);
    }
    println!("{}: {} ({})", report.command, report.status, out.join("report.json").display());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("maq: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
