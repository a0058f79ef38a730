use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use maiou_cli::commands;
use maiou_cli::config::{self, Analysis, RunConfig, UsageError};

#[derive(Debug, Parser)]
#[command(
    name = "maiou",
    version,
    about = "Mask-aware IoU anchor assignment, statistics and benchmarks"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Run configuration (TOML or JSON); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// COCO instances annotation file.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Keep iscrowd=1 annotations.
    #[arg(long, global = true)]
    include_crowd: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Label every anchor of every scene and write per-scene summaries.
    Assign {
        /// Assigner, e.g. atss:maiou:9 or fixed:iou:0.4:0.5 (repeatable).
        #[arg(long = "assigner", value_parser = config::parse_spec)]
        assigners: Vec<maiou_core::assigner::AssignerSpec>,
    },
    /// MOB-ratio and IoU-vs-maIoU histograms.
    Stats {
        /// Analyses to run: mob, joint (comma separated).
        #[arg(long = "analysis", value_delimiter = ',', num_args = 0..)]
        analyses: Option<Vec<Analysis>>,

        #[arg(long)]
        bins: Option<usize>,
    },
    /// Time brute-force against integral-image maIoU.
    Bench {
        /// Case as GRIDxANCHORSxGTS, e.g. 550x6416x8 (repeatable).
        #[arg(long = "case", value_parser = commands::parse_bench_case)]
        cases: Vec<maiou_core::analysis::BenchCase>,

        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Diff the labels of two or more assigners.
    Compare {
        /// Assigner spec (repeatable, at least two).
        #[arg(long = "spec", value_parser = config::parse_spec)]
        specs: Vec<maiou_core::assigner::AssignerSpec>,
    },
}

fn resolve(common: &CommonArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &common.dataset {
        cfg.dataset = Some(d.clone());
    }
    if let Some(o) = &common.out {
        cfg.output = o.clone();
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
        cfg.bench.seed = s;
    }
    cfg.include_crowd |= common.include_crowd;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = resolve(&cli.common)?;
    match cli.command {
        Command::Assign { assigners } => {
            if !assigners.is_empty() {
                cfg.assigners = assigners;
            }
            cfg.validate()?;
            commands::with_workers(cfg.workers, || commands::cmd_assign(&cfg))?
        }
        Command::Stats { analyses, bins } => {
            if let Some(a) = analyses {
                cfg.analyses = a;
            }
            if let Some(b) = bins {
                cfg.bins = b;
            }
            cfg.validate()?;
            commands::with_workers(cfg.workers, || commands::cmd_stats(&cfg))?
        }
        Command::Bench { cases, repetitions } => {
            if !cases.is_empty() {
                cfg.bench.cases = cases;
            }
            if let Some(r) = repetitions {
                cfg.bench.repetitions = r;
            }
            cfg.validate()?;
            commands::cmd_bench(&cfg)
        }
        Command::Compare { specs } => {
            if !specs.is_empty() {
                cfg.assigners = specs;
            } else if cli.common.config.is_none() {
                cfg.assigners = commands::default_comparison();
            }
            cfg.validate()?;
            commands::with_workers(cfg.workers, || commands::cmd_compare(&cfg))?
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MAIOU_LOG", "warn")).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
