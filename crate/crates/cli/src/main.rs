//! `filament`: generate loops, evolve them, and run diagnostics and convergence studies.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use commands::evolve::EvolveArgs;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "filament", version, about = "Random vortex filament simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `run.seed` and `loop.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (overrides `run.threads`; 0 picks the core count).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample or construct a loop and write its path and area CSVs.
    Generate(Common),
    /// Evolve a loop and write snapshots.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Directory written by `generate`; otherwise the loop comes from the config.
        #[arg(long, conflicts_with = "resume")]
        input: Option<PathBuf>,
        /// Directory written by `evolve` to continue from.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Snapshot step to continue from (default: the last one).
        #[arg(long, requires = "resume")]
        resume_step: Option<usize>,
    },
    /// Covariation, stretching and perturbation diagnostics of a run.
    Diagnose {
        #[command(flatten)]
        common: Common,
        /// Directory written by `evolve`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Refinement study with empirical orders.
    Converge(Common),
}

fn setup(c: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.set("run.seed", s)?;
        cfg.set("loop.seed", s)?;
    }
    if let Some(t) = c.threads {
        cfg.set("run.threads", t)?;
    }
    if let Some(o) = &c.out {
        cfg.set("output.dir", o.display())?;
    }
    let out = PathBuf::from(cfg.get::<String>("output.dir", "out".into())?);
    let threads = cfg.threads()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("cannot start the thread pool")?;
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(c) => {
            let (cfg, out) = setup(&c)?;
            commands::generate::run(&cfg, &out)
        }
        Command::Evolve {
            common,
            input,
            resume,
            resume_step,
        } => {
            let (cfg, out) = setup(&common)?;
            let args = EvolveArgs {
                input,
                resume,
                resume_step,
            };
            commands::evolve::run(&cfg, &out, &args)
        }
        Command::Diagnose { common, input } => {
            let (cfg, out) = setup(&common)?;
            commands::diagnose::run(&cfg, &out, input.as_deref().map(Path::new))
        }
        Command::Converge(c) => {
            let (cfg, out) = setup(&c)?;
            commands::converge::run(&cfg, &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FILAMENT_LOG", "error")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
