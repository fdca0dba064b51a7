//! Batch front-end for the solver: run / twin / sweep / calibrate / check
//! / inspect-snapshot.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

mod commands;

#[derive(Parser)]
#[command(
    name = "adas",
    version,
    about = "Pseudo-spectral alpha-model turbulence solver with nudging-based data assimilation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's output.directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and in-step parallelism.
    #[arg(long, env = "ADAS_THREADS")]
    threads: Option<usize>,
    /// Base seed; overrides the config's [seeds] section (reference_init = S,
    /// assimilated_init = S+1, gamma0 = S+2).
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Single reference simulation with diagnostics CSV.
    Run(CommonOpts),
    /// Twin experiment: reference + nudged copy, synchronization series CSV.
    Twin(CommonOpts),
    /// (mu, h) sweep producing a convergence-map CSV.
    Sweep(CommonOpts),
    /// Fit the abstract constant product c*ctilde from a sweep CSV.
    Calibrate {
        #[command(flatten)]
        common: CommonOpts,
        /// Sweep CSV produced by `adas sweep`.
        #[arg(long)]
        sweep_csv: PathBuf,
    },
    /// Evaluate the synchronization conditions only.
    Check(CommonOpts),
    /// Print the header and basic statistics of a snapshot file.
    InspectSnapshot {
        /// Snapshot path (.adas).
        path: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(opts) => {
            setup(&opts)?;
            commands::cmd_run(&opts.config, opts.out.as_deref(), opts.seed, opts.quiet)
        }
        Command::Twin(opts) => {
            setup(&opts)?;
            commands::cmd_twin(&opts.config, opts.out.as_deref(), opts.seed, opts.quiet)
        }
        Command::Sweep(opts) => {
            setup(&opts)?;
            commands::cmd_sweep(&opts.config, opts.out.as_deref(), opts.seed, opts.quiet)
        }
        Command::Calibrate { common, sweep_csv } => {
            setup(&common)?;
            commands::cmd_calibrate(
                &common.config,
                &sweep_csv,
                common.out.as_deref(),
                common.seed,
                common.quiet,
            )
        }
        Command::Check(opts) => {
            setup(&opts)?;
            commands::cmd_check(&opts.config, opts.seed, opts.quiet)
        }
        Command::InspectSnapshot { path } => commands::cmd_inspect_snapshot(&path),
    }
}

fn setup(opts: &CommonOpts) -> Result<()> {
    if let Some(threads) = opts.threads {
        if threads == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("rayon thread pool already initialized")?;
    }
    Ok(())
}
