mod baseline;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    MetricAudit,
    VolumeCompare,
    SolveHarmonic,
    Inequalities,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::MetricAudit => "metric-audit",
            Command::VolumeCompare => "volume-compare",
            Command::SolveHarmonic => "solve-harmonic",
            Command::Inequalities => "inequalities",
        }
    }
}

/// Runs Finsler measure-space experiments declared in a JSON document.
#[derive(Debug, Parser)]
#[command(name = "finsler-lab", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Experiment document with spaces, meshes, problems and suites.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for every randomised step; decimal or 0x-prefixed hex.
    #[arg(long, value_parser = parse_seed)]
    pub seed: Option<u64>,
    /// Run only this suite.
    #[arg(long)]
    pub suite: Option<String>,
    /// Overwrite the baselines with this run's measured values.
    #[arg(long)]
    pub bless: bool,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let r = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    r.map_err(|e| format!("bad seed `{s}`: {e}"))
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("FINSLER_LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("FINSLER_LAB_THREADS=`{v}` is not a count"))?;
    if n == 0 {
        return Err("FINSLER_LAB_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(commands::run(&cli))
}
