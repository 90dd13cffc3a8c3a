//! Command-line harness for the long-range percolation experiments.
//!
//! Every run writes into a single directory: its data files plus a
//! `manifest.json` recording the resolved configuration and a SHA-256 of each
//! file. Re-running a manifest reproduces the data files byte for byte.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::{execute, Artifacts};
use crate::config::{Overrides, RunConfig};
use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_hex, FileEntry, RunManifest, MANIFEST_NAME, SCHEMA_VERSION};

pub const DEFAULT_OUT: &str = "lrp-run";

#[derive(Debug, Parser)]
#[command(name = "lrp-lab", version, about = "Long-range percolation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample discrete or continuous instances.
    Sample(RunArgs),
    /// Distances and diameter of one sampled instance.
    Distance(RunArgs),
    /// Distance scaling series, exponent fit and plot script.
    Scaling(RunArgs),
    /// Cell-wise coupling of the discrete and continuous models.
    Couple(RunArgs),
    /// Proper-path census on a fine lattice.
    Explore(RunArgs),
    /// Repeat the run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Run directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Override a key of the command table, e.g. `--set beta=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Runs the parsed command and returns the run directory.
pub fn run(cli: Cli) -> CliResult<PathBuf> {
    let (name, args) = match cli.command {
        Command::Sample(a) => ("sample", a),
        Command::Distance(a) => ("distance", a),
        Command::Scaling(a) => ("scaling", a),
        Command::Couple(a) => ("couple", a),
        Command::Explore(a) => ("explore", a),
        Command::Rerun(a) => return rerun(&a),
    };
    let overrides = Overrides {
        seed: args.seed,
        jobs: args.jobs,
        out: args.out,
        set: args.set,
    };
    let cfg = config::load(name, args.config.as_deref(), &overrides)?;
    run_config(&cfg)
}

fn rerun(args: &RerunArgs) -> CliResult<PathBuf> {
    let manifest = RunManifest::load(&args.manifest)?;
    let mut cfg = manifest.config;
    if cfg.command.name() != manifest.command {
        return Err(CliError::Validation("manifest command does not match its config".into()));
    }
    cfg.out = Some(args.out.clone());
    if args.jobs.is_some() {
        cfg.jobs = args.jobs;
    }
    config::validate(&cfg)?;
    run_config(&cfg)
}

/// Executes a resolved configuration and writes its run directory.
pub fn run_config(cfg: &RunConfig) -> CliResult<PathBuf> {
    let artifacts = match cfg.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?
            .install(|| execute(cfg))?,
        None => execute(cfg)?,
    };
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    write_run(&out, cfg, artifacts)?;
    Ok(out)
}

fn write_run(out: &Path, cfg: &RunConfig, artifacts: Artifacts) -> CliResult<RunManifest> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut files = Vec::new();
    for (name, bytes) in artifacts.files {
        debug_assert!(!name.contains(['/', '\\']) && name != MANIFEST_NAME);
        let path = out.join(&name);
        std::fs::write(&path, &bytes).map_err(|e| CliError::io(&path, e))?;
        files.push(FileEntry {
            path: name,
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: cfg.command.name().to_string(),
        config: cfg.clone(),
        seed: cfg.seed,
        timestamp: chrono::Utc::now().to_rfc3339(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        files,
    };
    let path = out.join(MANIFEST_NAME);
    let mut body = serde_json::to_vec_pretty(&manifest).expect("serializable manifest");
    body.push(b'\n');
    std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}
