//! `ghz-metrology`: runs the simulations and writes CSV tables plus a JSON summary.
//!
//! Exit codes: 0 success, 1 computation or tolerance failure, 2 configuration error.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "ghz-metrology", version, about = "Noisy GHZ-probe metrology simulations")]
struct Cli {
    /// TOML run configuration; defaults are used for anything omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coherence of bit-flipped GHZ states in four prep/measure cases.
    Freeze {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Phase QFI of the same four cases plus the product-state line.
    PhaseQfi {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Parity fringes and optimal frequency precision under dissipation.
    Frequency {
        /// Monte Carlo shots per probe size; enables the trajectory columns.
        #[arg(long)]
        shots: Option<usize>,
        /// Adds rows with white noise of this visibility.
        #[arg(long)]
        v_add: Option<f64>,
    },
    /// Precision scaling with probe size for imperfect preparation.
    Scaling {
        #[arg(long)]
        n_points: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Checks the closed-form channel against an integrator; exits 1 on a breach.
    ChannelValidate {
        #[arg(long)]
        inject_fault: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli.out.unwrap_or_else(|| cfg.output.dir.clone());
    match cli.command {
        Command::Freeze { n } => {
            if let Some(n) = n {
                cfg.freeze.n = n;
            }
            commands::freeze(&cfg, &out)
        }
        Command::PhaseQfi { n } => {
            if let Some(n) = n {
                cfg.phase_qfi.n = n;
            }
            commands::phase_qfi(&cfg, &out)
        }
        Command::Frequency { shots, v_add } => {
            if let Some(s) = shots {
                cfg.frequency.monte_carlo.enabled = true;
                cfg.frequency.monte_carlo.shots = s;
            }
            if v_add.is_some() {
                cfg.frequency.v_add = v_add;
            }
            commands::frequency(&cfg, &out)
        }
        Command::Scaling { n_points, n_max } => {
            if let Some(p) = n_points {
                cfg.scaling.n_points = p;
            }
            if let Some(m) = n_max {
                cfg.scaling.n_max = m;
            }
            commands::scaling(&cfg, &out)
        }
        Command::ChannelValidate { inject_fault } => {
            cfg.channel_validate.inject_fault |= inject_fault;
            commands::channel_validate(&cfg, &out)
        }
    }?;
    println!("seed={} out={}", cfg.seed, out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
