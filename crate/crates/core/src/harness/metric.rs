use crate::error::{Error, Result};

/// One-based index of the first score reaching `target · reference_best`,
/// or `budget` when no score does.
pub fn evals_to_target(scores: &[f64], reference_best: f64, target: f64, budget: usize) -> Result<usize> {
    if !(reference_best > 0.0) {
        return Err(Error::MetricUndefined(reference_best));
    }
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::invalid(format!("target must be in (0, 1], got {target}")));
    }
    let threshold = target * reference_best;
    Ok(scores
        .iter()
        .position(|&s| s >= threshold)
        .map_or(budget, |i| i + 1))
}
