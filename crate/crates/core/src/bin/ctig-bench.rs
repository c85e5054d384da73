use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctig::counterfactual::MetricKind;
use ctig::io::{parse_config, Experiment, RunConfig};
use ctig::runner::{evaluate_scores, execute};

#[derive(Parser)]
#[command(name = "ctig-bench", version, about = "Causal event sequence generator and counterfactual benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, env = "CTIG_THREADS")]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Accuracy,
    AveragePrecision,
    Auc,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random causal model and simulate one sequence.
    Generate(Common),
    /// Build a CTIG model and dump its influence matrices.
    Ctig(Common),
    /// Mean distance between pairs of random models.
    Distance(Common),
    /// Variance of the mean distance against the number of replications.
    VarianceStudy(Common),
    /// Causal-shift study.
    ExperimentA(Common),
    /// Timestamp-shuffle study.
    ExperimentB(Common),
    /// Monotonicity, Markov and PNS checks.
    Properties(Common),
    /// Write benchmark datasets for external predictors.
    Export(Common),
    /// Score an exported dataset from external score files.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        test_scores: PathBuf,
        #[arg(long)]
        test_cf_scores: PathBuf,
        #[arg(long, value_enum, default_value = "accuracy")]
        metric: Metric,
    },
}

fn load(experiment: Experiment, c: Common) -> ctig::Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    cfg.experiment = experiment;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(out) = c.out {
        cfg.out = out;
    }
    if let Some(threads) = c.threads {
        cfg.threads = threads;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> ctig::Result<()> {
    let (experiment, common) = match cli.command {
        Command::Generate(c) => (Experiment::Generate, c),
        Command::Ctig(c) => (Experiment::Ctig, c),
        Command::Distance(c) => (Experiment::Distance, c),
        Command::VarianceStudy(c) => (Experiment::VarianceStudy, c),
        Command::ExperimentA(c) => (Experiment::ExperimentA, c),
        Command::ExperimentB(c) => (Experiment::ExperimentB, c),
        Command::Properties(c) => (Experiment::Properties, c),
        Command::Export(c) => (Experiment::Export, c),
        Command::Evaluate { dataset, test_scores, test_cf_scores, metric } => {
            let metric = match metric {
                Metric::Accuracy => MetricKind::Accuracy,
                Metric::AveragePrecision => MetricKind::AveragePrecision,
                Metric::Auc => MetricKind::Auc,
            };
            let res = evaluate_scores(&dataset, &test_scores, &test_cf_scores, metric)?;
            println!("{}", serde_json::to_string_pretty(&res).expect("evaluation serializes"));
            return Ok(());
        }
    };
    let cfg = load(experiment, common)?;
    // Fails only if a pool already exists.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    let summary = execute(&cfg)?;
    for path in &summary.written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
