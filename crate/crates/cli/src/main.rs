//! `aimm`: batch front-end of the affine inflation market model.

mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "aimm", version, about = "Affine inflation market model: calibrate, price, surface, validate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Calibration settings JSON; defaults apply to missing fields.
    #[arg(long)]
    pub settings: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Filters {
    /// Smallest maturity (years) to include.
    #[arg(long)]
    pub min_maturity: Option<f64>,
    /// Largest maturity (years) to include.
    #[arg(long)]
    pub max_maturity: Option<f64>,
    /// Smallest strike to include.
    #[arg(long, allow_hyphen_values = true)]
    pub min_strike: Option<f64>,
    /// Largest strike to include.
    #[arg(long, allow_hyphen_values = true)]
    pub max_strike: Option<f64>,
}

impl Filters {
    pub fn keep(&self, maturity: f64, strike: f64) -> bool {
        let eps = 1e-12;
        self.min_maturity.is_none_or(|m| maturity >= m - eps)
            && self.max_maturity.is_none_or(|m| maturity <= m + eps)
            && self.min_strike.is_none_or(|m| strike >= m - eps)
            && self.max_strike.is_none_or(|m| strike <= m + eps)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Calibrate a market snapshot; writes model.json, report.json and result tables.
    Calibrate {
        #[arg(long)]
        snapshot: PathBuf,
        /// Accepted for symmetry with the other commands; calibration is deterministic.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Price an instrument list (CSV: kind,k,j,strike) under a fitted model.
    Price {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        instruments: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        filters: Filters,
    },
    /// Market and model implied volatilities on the quote grids of a snapshot.
    Surface {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        snapshot: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        filters: Filters,
    },
    /// Invariant checks and Monte Carlo cross-checks of a fitted model.
    Validate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Write the synthetic reference snapshot and the model it was generated from.
    Synth {
        #[command(flatten)]
        common: Common,
    },
}

fn init_threads() {
    if let Some(n) = std::env::var("AIMM_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("AIMM_THREADS ignored: {e}");
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Calibrate { snapshot, common, .. } => commands::calibrate(&snapshot, &common),
        Command::Price {
            model,
            instruments,
            common,
            filters,
        } => commands::price(&model, &instruments, &common, &filters),
        Command::Surface {
            model,
            snapshot,
            common,
            filters,
        } => commands::surface(&model, &snapshot, &common, &filters),
        Command::Validate {
            model,
            seed,
            paths,
            common,
        } => commands::validate(&model, seed, paths, &common),
        Command::Synth { common } => commands::synth(&common),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("aimm: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
