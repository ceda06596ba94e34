//! Repeated seeded runs under a fixed evaluation budget, scored by
//! evaluations-to-target.
//!
//! Problems are scores to maximize. Each run's per-evaluation scores feed
//! [`evals_to_target`] against the best score seen on that problem by any
//! algorithm in the experiment.

pub mod config;
pub mod experiment;
pub mod metric;
pub mod output;
pub mod table;

pub use config::{AlgorithmConfig, ExperimentConfig, ProblemConfig};
pub use experiment::{run_experiment, run_experiment_with, ExperimentOutcome, RunRecord};
pub use metric::evals_to_target;
pub use output::write_outputs;
pub use table::{emit_results, parse_markdown_cell, CellStats, CellValue, OutputFormat, ResultsTable};
