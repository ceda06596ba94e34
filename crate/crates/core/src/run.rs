//! The result record shared by every optimizer.

use crate::error::Error;

/// The evaluation that stopped a run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationFailure {
    pub point: Vec<f64>,
    pub value: f64,
}

impl From<EvaluationFailure> for Error {
    fn from(f: EvaluationFailure) -> Self {
        Error::EvaluationFailed { point: f.point, value: f.value }
    }
}

/// Every objective evaluation a run made, in order, plus the best one.
///
/// Values are in minimization convention: `best_value` is the smallest traced
/// value and `best_point` the first point that attained it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub trace: Vec<(Vec<f64>, f64)>,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub evals_used: usize,
    pub seed: u64,
    /// Set when the run was aborted by a non-finite evaluation. The failing
    /// evaluation is not part of the trace.
    pub failure: Option<EvaluationFailure>,
}

impl RunResult {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.trace.iter().map(|(_, v)| *v)
    }

    /// Running minimum of the traced values.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.values()
            .map(|v| {
                best = best.min(v);
                best
            })
            .collect()
    }
}

/// Accumulates a trace while tracking the incumbent.
#[derive(Debug)]
pub(crate) struct TraceRecorder {
    trace: Vec<(Vec<f64>, f64)>,
    best: Option<usize>,
    budget: usize,
}

impl TraceRecorder {
    pub(crate) fn new(budget: usize) -> Self {
        Self { trace: Vec::with_capacity(budget), best: None, budget }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.budget - self.trace.len()
    }

    pub(crate) fn len(&self) -> usize {
        self.trace.len()
    }

    pub(crate) fn history(&self) -> &[(Vec<f64>, f64)] {
        &self.trace
    }

    pub(crate) fn best_value(&self) -> Option<f64> {
        self.best.map(|i| self.trace[i].1)
    }

    /// Records a finite evaluation. Callers check the budget first.
    pub(crate) fn push(&mut self, point: Vec<f64>, value: f64) {
        debug_assert!(self.trace.len() < self.budget);
        debug_assert!(value.is_finite());
        let idx = self.trace.len();
        if self.best.is_none_or(|b| value < self.trace[b].1) {
            self.best = Some(idx);
        }
        self.trace.push((point, value));
    }

    pub(crate) fn finish(self, seed: u64, failure: Option<EvaluationFailure>) -> RunResult {
        let (best_point, best_value) = match self.best {
            Some(i) => (self.trace[i].0.clone(), self.trace[i].1),
            None => (Vec::new(), f64::INFINITY),
        };
        RunResult {
            evals_used: self.trace.len(),
            trace: self.trace,
            best_point,
            best_value,
            seed,
            failure,
        }
    }
}

/// Evaluates `f` at `x`, turning a non-finite value into a failure.
pub(crate) fn checked_eval<O: crate::Objective + ?Sized>(
    f: &O,
    x: &[f64],
) -> Result<f64, EvaluationFailure> {
    let v = f.evaluate(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvaluationFailure { point: x.to_vec(), value: v })
    }
}
