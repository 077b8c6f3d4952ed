//! Config-driven experiment runner for the percolation locality lab.

mod commands;
mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::Validation;

/// Environment override prefix: PERCLAB_SEED, PERCLAB_OUT, PERCLAB_THREADS.
const ENV_PREFIX: &str = "PERCLAB_";

#[derive(Parser)]
#[command(name = "perclab", version, about = "percolation locality laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (strict TOML; unknown keys are errors).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: config `out`, then `./out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize a ball of a graph oracle as a fixture file.
    Ball(Common),
    /// Compare rooted balls of two graphs radius by radius.
    Locality(Common),
    /// Build and verify a net.
    Net(Common),
    /// Scan the block-event probability over p and n.
    #[command(name = "en-scan")]
    EnScan(Common),
    /// Renormalize a sampled configuration onto a net.
    Renorm(Common),
    /// Exact stochastic-domination table and empirical q threshold.
    Dominate(Common),
    /// Coupled exploration along a neighbor-lifting map.
    Couple(Common),
    /// Bisection estimate of the percolation threshold.
    #[command(name = "pc-estimate")]
    PcEstimate(Common),
    /// End-to-end renormalization pipeline with certificates.
    Pipeline(Common),
}

impl Command {
    fn kind(&self) -> &'static str {
        match self {
            Command::Ball(_) => "ball",
            Command::Locality(_) => "locality",
            Command::Net(_) => "net",
            Command::EnScan(_) => "en-scan",
            Command::Renorm(_) => "renorm",
            Command::Dominate(_) => "dominate",
            Command::Couple(_) => "couple",
            Command::PcEstimate(_) => "pc-estimate",
            Command::Pipeline(_) => "pipeline",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Ball(c)
            | Command::Locality(c)
            | Command::Net(c)
            | Command::EnScan(c)
            | Command::Renorm(c)
            | Command::Dominate(c)
            | Command::Couple(c)
            | Command::PcEstimate(c)
            | Command::Pipeline(c) => c,
        }
    }
}

fn env_u64(name: &str) -> Option<u64> {
    std::env::var(format!("{ENV_PREFIX}{name}")).ok()?.parse().ok()
}

fn env_usize(name: &str) -> Option<usize> {
    std::env::var(format!("{ENV_PREFIX}{name}")).ok()?.parse().ok()
}

fn env_path(name: &str) -> Option<PathBuf> {
    std::env::var(format!("{ENV_PREFIX}{name}")).ok().map(PathBuf::from)
}

fn run(cli: Cli) -> Result<()> {
    let kind = cli.command.kind();
    let common = cli.command.common();
    let (raw, config_text) = config::load(&common.config)?;

    if let Some(declared) = &raw.kind {
        if declared != kind {
            anyhow::bail!(Validation(format!(
                "config kind \"{declared}\" does not match subcommand \"{kind}\""
            )));
        }
    }

    // Precedence: flag, then environment, then config.
    let seed = config::require_seed(&raw, common.seed.or_else(|| env_u64("SEED")))?;
    let out = common
        .out
        .clone()
        .or_else(|| env_path("OUT"))
        .or_else(|| raw.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let threads = common
        .threads
        .or_else(|| env_usize("THREADS"))
        .or(raw.threads);
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .ok();
    }
    std::fs::create_dir_all(&out)?;

    let ctx = commands::RunContext {
        out: out.clone(),
        seed,
    };
    let artifacts = match &cli.command {
        Command::Ball(_) => commands::run_ball(&raw, &ctx)?,
        Command::Locality(_) => commands::run_locality(&raw, &ctx)?,
        Command::Net(_) => commands::run_net(&raw, &ctx)?,
        Command::EnScan(_) => commands::run_en_scan(&raw, &ctx)?,
        Command::Renorm(_) => commands::run_renorm(&raw, &ctx)?,
        Command::Dominate(_) => commands::run_dominate(&raw, &ctx)?,
        Command::Couple(_) => commands::run_couple(&raw, &ctx)?,
        Command::PcEstimate(_) => commands::run_pc_estimate(&raw, &ctx)?,
        Command::Pipeline(_) => commands::run_pipeline(&raw, &ctx)?,
    };

    let manifest = emit::Manifest {
        kind: kind.to_string(),
        seed,
        threads: threads.unwrap_or_else(rayon::current_num_threads),
        config_sha256: emit::sha256_hex(&config_text),
        config_text,
        artifacts: artifacts
            .iter()
            .map(|p| p.strip_prefix(&out).map(|r| r.to_path_buf()).unwrap_or_else(|_| p.clone()))
            .collect(),
    };
    emit::write_manifest(&out, &manifest)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<Validation>().is_some()
                || err.downcast_ref::<toml::de::Error>().is_some()
            {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
