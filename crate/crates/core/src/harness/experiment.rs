use std::collections::BTreeMap;

use crate::baselines::{run_adalipo, run_prs};
use crate::error::{Error, Result};
use crate::gradopt::run_gradopt;
use crate::objective::{Counted, Negated};
use crate::parallel::{with_workers, Parallelism};
use crate::rng::derive_seed;

use super::config::{AlgorithmConfig, ExperimentConfig, ResolvedProblem};
use super::metric::evals_to_target;
use super::table::{CellStats, CellValue, ResultsTable};

/// Scores observed by one run, in evaluation order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem: usize,
    pub algorithm: usize,
    pub repetition: usize,
    pub seed: u64,
    pub scores: Vec<f64>,
    pub failed: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub table: ResultsTable,
    pub runs: Vec<RunRecord>,
    pub problem_names: Vec<String>,
    pub algorithm_names: Vec<String>,
}

/// Child seed of one `(problem, algorithm, repetition)` run.
pub fn child_seed(master: u64, problem: usize, algorithm: usize, repetition: usize) -> u64 {
    derive_seed(master, &[problem as u64, algorithm as u64, repetition as u64])
}

fn run_one(problem: &ResolvedProblem, algo: &AlgorithmConfig, budget: usize, seed: u64) -> Result<(Vec<f64>, bool)> {
    let loss = Counted::new(Negated(problem.score.clone()));
    let domain = problem.domain();
    let result = match algo {
        AlgorithmConfig::Gradopt { .. } => {
            let cfg = algo.gradopt_config(budget, seed).expect("gradopt variant");
            run_gradopt(&loss, domain, &cfg)?
        }
        AlgorithmConfig::Prs { .. } => run_prs(&loss, domain, budget, seed)?,
        AlgorithmConfig::Adalipo { .. } => {
            let cfg = algo.adalipo_config(seed).expect("adalipo variant");
            run_adalipo(&loss, domain, budget, &cfg)?
        }
    };
    debug_assert_eq!(loss.eval_count() as usize, result.evals_used + usize::from(result.failed()));
    Ok((result.values().map(|v| -v).collect(), result.failed()))
}

/// Runs the experiment on up to `cfg.workers` threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with(cfg, Parallelism::Parallel)
}

/// Runs every `(problem, algorithm, repetition)`, then scores all runs
/// against the per-problem best. The outcome does not depend on `par` or on
/// the worker count.
pub fn run_experiment_with(cfg: &ExperimentConfig, par: Parallelism) -> Result<ExperimentOutcome> {
    let problems = cfg.resolve_problems()?;
    for p in &problems {
        log::info!("problem {}: {}", p.name, p.description);
    }
    let (np, na, nr) = (problems.len(), cfg.algorithms.len(), cfg.repetitions);
    let tasks = np * na * nr;

    let results = with_workers(cfg.workers, || {
        par.map_indexed(tasks, |i| {
            let (p, rest) = (i / (na * nr), i % (na * nr));
            let (a, r) = (rest / nr, rest % nr);
            let seed = child_seed(cfg.master_seed, p, a, r);
            run_one(&problems[p], &cfg.algorithms[a], cfg.budget, seed).map(|(scores, failed)| RunRecord {
                problem: p,
                algorithm: a,
                repetition: r,
                seed,
                scores,
                failed,
            })
        })
    });
    let runs: Vec<RunRecord> = results.into_iter().collect::<Result<_>>()?;

    let problem_names: Vec<String> = problems.iter().map(|p| p.name.clone()).collect();
    let algorithm_names: Vec<String> = cfg.algorithms.iter().map(AlgorithmConfig::name).collect();
    let table = score_runs(cfg, &runs, &problem_names, &algorithm_names);
    Ok(ExperimentOutcome { table, runs, problem_names, algorithm_names })
}

/// Second pass: reference bests, then per-cell evals-to-target statistics.
pub fn score_runs(
    cfg: &ExperimentConfig,
    runs: &[RunRecord],
    problem_names: &[String],
    algorithm_names: &[String],
) -> ResultsTable {
    let mut reference_best = BTreeMap::new();
    for (p, name) in problem_names.iter().enumerate() {
        let best = runs
            .iter()
            .filter(|r| r.problem == p && !r.failed)
            .flat_map(|r| r.scores.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max);
        reference_best.insert(name.clone(), best);
    }

    let mut table = ResultsTable::new(cfg.budget, problem_names.to_vec(), algorithm_names.to_vec(), cfg.targets.clone());
    table.reference_best = reference_best.clone();
    for (p, pname) in problem_names.iter().enumerate() {
        let best = reference_best[pname];
        for (a, aname) in algorithm_names.iter().enumerate() {
            let cell_runs: Vec<&RunRecord> = runs.iter().filter(|r| r.problem == p && r.algorithm == a).collect();
            let failed = cell_runs.iter().filter(|r| r.failed).count();
            for &target in &cfg.targets {
                let value = if !(best > 0.0) {
                    CellValue::NotAvailable(Error::MetricUndefined(best).to_string())
                } else if failed == cell_runs.len() {
                    CellValue::NotAvailable("every run failed".into())
                } else {
                    let evals: Vec<usize> = cell_runs
                        .iter()
                        .filter(|r| !r.failed)
                        .map(|r| evals_to_target(&r.scores, best, target, cfg.budget).expect("reference is positive"))
                        .collect();
                    CellValue::Stats(CellStats::from_evals(&evals, cfg.budget, failed))
                };
                table.set(pname, aname, target, value);
            }
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ProblemConfig;

    fn sphere_problem() -> ProblemConfig {
        ProblemConfig::Synthetic {
            name: "Sphere".into(),
            function: "sphere".into(),
            dimension: 2,
            lower: None,
            upper: None,
            offset: 1.0,
        }
    }

    #[test]
    fn single_cell_per_target_and_deterministic() {
        let mut cfg = ExperimentConfig::new(vec![sphere_problem()], vec![AlgorithmConfig::gradopt()]);
        cfg.repetitions = 1;
        cfg.budget = 100;
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment_with(&cfg, Parallelism::Sequential).unwrap();
        assert_eq!(a.table.cells().count(), 3);
        assert_eq!(a.table, b.table);
        assert_eq!(a.runs, b.runs);
    }

    #[test]
    fn budget_one_prs_is_hit_or_censored() {
        let mut cfg = ExperimentConfig::new(
            vec![sphere_problem()],
            vec![AlgorithmConfig::prs(), AlgorithmConfig::adalipo()],
        );
        cfg.budget = 1;
        cfg.repetitions = 6;
        let out = run_experiment(&cfg).unwrap();
        let best = out.table.reference_best["Sphere"];
        for r in out.runs.iter().filter(|r| r.algorithm == 0) {
            assert_eq!(r.scores.len(), 1);
            let e = evals_to_target(&r.scores, best, 0.99, 1).unwrap();
            assert_eq!(e, 1);
        }
        for target in &cfg.targets {
            match out.table.get("Sphere", "PRS", *target).unwrap() {
                CellValue::Stats(s) => assert_eq!(s.mean, 1.0),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn reference_dominates_every_trace() {
        let mut cfg = ExperimentConfig::new(
            vec![sphere_problem()],
            vec![AlgorithmConfig::gradopt(), AlgorithmConfig::prs(), AlgorithmConfig::adalipo()],
        );
        cfg.budget = 60;
        cfg.repetitions = 4;
        let out = run_experiment(&cfg).unwrap();
        let best = out.table.reference_best["Sphere"];
        assert!(out.runs.iter().all(|r| r.scores.iter().all(|s| *s <= best)));
        assert!(out.runs.iter().any(|r| r.scores.contains(&best)));
        for r in &out.runs {
            assert!(r.scores.len() <= cfg.budget);
            if r.algorithm == 0 {
                assert_eq!(r.scores.len(), 60);
            }
        }
    }

    #[test]
    fn non_positive_reference_gives_na() {
        let mut p = sphere_problem();
        if let ProblemConfig::Synthetic { offset, .. } = &mut p {
            *offset = -5.0;
        }
        let mut cfg = ExperimentConfig::new(vec![p], vec![AlgorithmConfig::prs()]);
        cfg.budget = 10;
        cfg.repetitions = 2;
        let out = run_experiment(&cfg).unwrap();
        assert!(matches!(out.table.get("Sphere", "PRS", 0.9), Some(CellValue::NotAvailable(_))));
    }

    #[test]
    fn failed_runs_are_excluded_and_counted() {
        let cfg = ExperimentConfig::new(vec![sphere_problem()], vec![AlgorithmConfig::prs()]);
        let runs = vec![
            RunRecord { problem: 0, algorithm: 0, repetition: 0, seed: 0, scores: vec![0.5, 1.0], failed: false },
            RunRecord { problem: 0, algorithm: 0, repetition: 1, seed: 1, scores: vec![9.0], failed: true },
            RunRecord { problem: 0, algorithm: 0, repetition: 2, seed: 2, scores: vec![0.2, 0.3], failed: false },
        ];
        let table = score_runs(&cfg, &runs, &["Sphere".into()], &["PRS".into()]);
        assert_eq!(table.reference_best["Sphere"], 1.0);
        match table.get("Sphere", "PRS", 0.9).unwrap() {
            CellValue::Stats(s) => {
                assert_eq!(s.failed, 1);
                assert_eq!(s.runs, 2);
                assert_eq!(s.censored, 1);
                assert_eq!(s.mean, (2.0 + 1000.0) / 2.0);
            }
            other => panic!("{other:?}"),
        }
    }
}
