use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gradopt::harness::{run_experiment, write_outputs, AlgorithmConfig, ExperimentConfig, OutputFormat};
use gradopt::objectives::SyntheticFunction;

#[derive(Parser)]
#[command(name = "gradopt", version, about = "Graduated black-box optimization benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write results, traces and a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Evaluations per run.
        #[arg(long)]
        budget: Option<usize>,
        /// Repetitions per (problem, algorithm).
        #[arg(long)]
        reps: Option<usize>,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 uses every core.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value = "markdown", value_parser = ["markdown", "csv"])]
        format: String,
    },
    /// List problem kinds, synthetic functions and algorithms.
    List,
    /// Check a config and load its datasets without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> gradopt::Result<()> {
    match cli.command {
        Command::Run { config, budget, reps, seed, workers, out, format } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(b) = budget {
                cfg.budget = b;
            }
            if let Some(r) = reps {
                cfg.repetitions = r;
            }
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let format: OutputFormat = format.parse()?;
            let outcome = run_experiment(&cfg)?;
            let paths = write_outputs(&out, &cfg, &outcome, format)?;
            let failed = outcome.runs.iter().filter(|r| r.failed).count();
            println!(
                "{} runs ({} failed); results in {}",
                outcome.runs.len(),
                failed,
                paths.results.display()
            );
        }
        Command::List => {
            println!("problem kinds:");
            println!("  synthetic   offset - f(x) for a synthetic loss f");
            println!("  krr         10-fold cross-validated Gaussian kernel ridge regression over (lambda, sigma)");
            println!("  krr weighted = true   additionally one weight in [0,1] per sample");
            println!("  surrogate   separable quadratic on the weighted-KRR domain");
            println!("synthetic functions:");
            for name in SyntheticFunction::NAMES {
                println!("  {name}");
            }
            println!("algorithms:");
            for kind in AlgorithmConfig::KINDS {
                println!("  {kind}");
            }
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let problems = cfg.resolve_problems()?;
            println!(
                "ok: budget {}, {} repetitions, targets {:?}, master seed {}",
                cfg.budget, cfg.repetitions, cfg.targets, cfg.master_seed
            );
            for p in &problems {
                println!("  problem {} (d = {}): {}", p.name, p.score.dimension(), p.description);
            }
            for a in &cfg.algorithms {
                println!("  algorithm {}", a.name());
            }
        }
    }
    Ok(())
}
