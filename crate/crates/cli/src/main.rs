use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use tix::harness::{self, RunConfig};
use tix::synth::{generate, SynthSpec};

#[derive(Parser)]
#[command(
    name = "tix",
    version,
    about = "Time-indexed imputation benchmark runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario x imputer matrix described by a config file.
    Run {
        config: PathBuf,
        /// Overrides the config's run seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Overrides the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Generate a synthetic series from a spec file and write it as CSV.
    Synth {
        spec: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Score a prediction CSV against a ground-truth CSV.
    Score {
        truth: PathBuf,
        pred: PathBuf,
        /// Standard deviation used to normalize the MAE.
        #[arg(long, default_value_t = 1.0)]
        std: f64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            seed,
            jobs,
            output_dir,
        } => {
            let mut cfg = RunConfig::load(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let report = harness::run_with_jobs(&cfg, jobs)?;
            let files = harness::write_report(&report, &cfg.output_dir)
                .with_context(|| format!("writing reports to {}", cfg.output_dir.display()))?;
            eprintln!(
                "{} records, {} tasks",
                report.records.len(),
                report.ranks.n_tasks
            );
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Synth { spec, output } => {
            let text = std::fs::read_to_string(&spec)
                .with_context(|| format!("reading {}", spec.display()))?;
            let spec: SynthSpec = toml::from_str(&text).context("parsing synth spec")?;
            let series = generate(&spec)?;
            harness::write_series_csv(&series, &output)?;
            eprintln!("{} ticks written to {}", series.len(), output.display());
        }
        Command::Score { truth, pred, std } => {
            let score = harness::score_files(&truth, &pred, std)?;
            println!("{}", serde_json::to_string_pretty(&score)?);
        }
    }
    Ok(())
}
