use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::config::ExperimentConfig;
use super::experiment::{ExperimentOutcome, RunRecord};
use super::table::{emit_results, OutputFormat};

/// Files written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub results: PathBuf,
    pub manifest: PathBuf,
    pub traces: PathBuf,
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// `eval_index,value,best_so_far` rows of one run (scores, higher is better).
pub fn trace_csv(run: &RunRecord) -> String {
    let mut out = String::from("eval_index,value,best_so_far\n");
    let mut best = f64::NEG_INFINITY;
    for (i, v) in run.scores.iter().enumerate() {
        best = best.max(*v);
        writeln!(out, "{},{v},{best}", i + 1).unwrap();
    }
    out
}

/// Writes the results table, the resolved config and one trace per run.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    outcome: &ExperimentOutcome,
    format: OutputFormat,
) -> Result<OutputPaths> {
    let traces = dir.join("traces");
    fs::create_dir_all(&traces)?;

    let results = dir.join(format!("results.{}", format.extension()));
    fs::write(&results, emit_results(&outcome.table, format))?;

    let manifest = dir.join("manifest.toml");
    let mut text = format!("# resolved experiment, gradopt {}\n", env!("CARGO_PKG_VERSION"));
    text.push_str(&cfg.to_toml());
    text.push_str("\n[reference_best]\n");
    for (problem, best) in &outcome.table.reference_best {
        writeln!(text, "{:?} = {best:?}", problem).unwrap();
    }
    fs::write(&manifest, text)?;

    for run in &outcome.runs {
        let name = format!(
            "{}__{}__r{:03}{}.csv",
            file_safe(&outcome.problem_names[run.problem]),
            file_safe(&outcome.algorithm_names[run.algorithm]),
            run.repetition,
            if run.failed { "_failed" } else { "" }
        );
        fs::write(traces.join(name), trace_csv(run))?;
    }
    Ok(OutputPaths { results, manifest, traces })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_rows_track_running_best() {
        let run = RunRecord { problem: 0, algorithm: 0, repetition: 0, seed: 0, scores: vec![0.5, 0.25, 0.75], failed: false };
        assert_eq!(trace_csv(&run), "eval_index,value,best_so_far\n1,0.5,0.5\n2,0.25,0.5\n3,0.75,0.75\n");
    }

    #[test]
    fn names_are_sanitized() {
        assert_eq!(file_safe("Housing HD/1"), "Housing_HD_1");
    }
}
