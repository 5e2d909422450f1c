//! Batch CLI for the graph-radiomic descriptor pipeline.
//!
//! Stages are resumable: each command reads only the previous stage's files.
//! `resample` -> `extract` -> `cluster` -> `graph` -> `plot` walk the stage
//! files; `descriptor`, `classify`, and `stats` are the batch path from a
//! manifest to feature CSVs, a report, and significance tests;
//! `phantom-cohort` fabricates a labeled synthetic cohort for end-to-end
//! runs without clinical data.

mod commands;
mod manifest;
mod plotting;

use clap::{Args, Parser, Subcommand};
use grrail_core::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "grrail", version, about = "Graph-radiomic lesion descriptor pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonOpts {
    /// key=value config file; CLI flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = one per logical CPU).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed; per-subject seeds derive from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Resample volumes and masks to an isotropic grid.
    Resample(commands::resample::ResampleArgs),
    /// Compute the 13 voxel-wise texture maps per subject.
    Extract(commands::extract::ExtractArgs),
    /// Cluster each extracted feature map (GMM + BIC).
    Cluster(commands::cluster::ClusterArgs),
    /// Build cluster-centroid graphs from cluster maps.
    Graph(commands::graph::GraphArgs),
    /// Run the per-subject descriptor pipeline from a manifest.
    Descriptor(commands::descriptor::DescriptorArgs),
    /// Feature selection, cross-validation, and held-out evaluation.
    Classify(commands::classify::ClassifyArgs),
    /// Significance tests on descriptor tables and accuracy pairs.
    #[command(subcommand)]
    Stats(commands::stats::StatsCommand),
    /// Generate a synthetic phantom cohort with a manifest.
    PhantomCohort(commands::phantom::PhantomArgs),
    /// Emit heatmap and graph renderings as PNG files.
    Plot(commands::plot::PlotArgs),
}

fn resolve_config(common: &CommonOpts) -> grrail_core::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_kv_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(threads) = common.threads {
        cfg.threads = threads;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn install_pool(threads: usize) -> grrail_core::Result<()> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| grrail_core::Error::InvalidParam(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run() -> grrail_core::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Resample(args) => {
            let cfg = resolve_config(&args.common)?;
            install_pool(cfg.threads)?;
            commands::resample::run(&args, &cfg)
        }
        Command::Extract(args) => {
            let cfg = resolve_config(&args.common)?;
            install_pool(cfg.threads)?;
            commands::extract::run(&args, &cfg)
        }
        Command::Cluster(args) => {
            let cfg = resolve_config(&args.common)?;
            install_pool(cfg.threads)?;
            commands::cluster::run(&args, &cfg)
        }
        Command::Graph(args) => {
            let cfg = resolve_config(&args.common)?;
            install_pool(cfg.threads)?;
            commands::graph::run(&args, &cfg)
        }
        Command::Descriptor(args) => {
            let cfg = resolve_config(&args.common)?;
            install_pool(cfg.threads)?;
            commands::descriptor::run(&args, &cfg)
        }
        Command::Classify(args) => {
            let cfg = resolve_config(&args.common)?;
            install_pool(cfg.threads)?;
            commands::classify::run(&args, &cfg)
        }
        Command::Stats(cmd) => commands::stats::run(&cmd),
        Command::PhantomCohort(args) => {
            let cfg = resolve_config(&args.common)?;
            install_pool(cfg.threads)?;
            commands::phantom::run(&args, &cfg)
        }
        Command::Plot(args) => {
            let cfg = resolve_config(&args.common)?;
            install_pool(cfg.threads)?;
            commands::plot::run(&args, &cfg)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // machine-readable failure on stderr
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
