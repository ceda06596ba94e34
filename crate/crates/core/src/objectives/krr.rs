//! Cross-validated Gaussian kernel ridge regression.
//!
//! For fold `k`, the predictor `f̂_k(·) = Σ_j α_j k(·, X_j)` is fitted on the
//! other folds by minimizing
//!
//! ```text
//! (1/n') Σ_i w_i (f(X_i) − Y_i)² + 10^λ ‖f‖²_H
//! ```
//!
//! with kernel `k(a, b) = exp(−‖a − b‖² / (2 s²))`, `s = 10^σ`. The score is
//!
//! ```text
//! 1 − (1/K) Σ_k Σ_{i∈D_k} (f̂_k(X_i) − Y_i)² / Σ_{i∈D_k} (Ȳ − Y_i)²
//! ```
//!
//! where `Ȳ` is the mean of all targets. A fold whose linear system cannot be
//! solved counts as ratio 1, i.e. no skill.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::domain::SearchBox;
use crate::error::{Error, Result};
use crate::objective::Objective;

use super::dataset::{Dataset, FoldSplit};

pub const LAMBDA_RANGE: (f64, f64) = (-2.0, 4.0);
pub const SIGMA_RANGE: (f64, f64) = (-5.0, 5.0);

/// Log10 regularizer and bandwidth, plus optional per-sample weights.
#[derive(Debug, Clone, PartialEq)]
pub struct KrrHyperparams {
    pub lambda_exp: f64,
    pub sigma_exp: f64,
    pub weights: Option<Vec<f64>>,
}

impl KrrHyperparams {
    pub fn new(lambda_exp: f64, sigma_exp: f64) -> Self {
        Self { lambda_exp, sigma_exp, weights: None }
    }

    pub fn with_weights(mut self, w: Vec<f64>) -> Self {
        self.weights = Some(w);
        self
    }

    /// Reads `(λ, σ)` or `(λ, σ, w_1, …, w_n)` from an optimizer point.
    pub fn from_point(x: &[f64]) -> Self {
        let weights = (x.len() > 2).then(|| x[2..].to_vec());
        Self { lambda_exp: x[0], sigma_exp: x[1], weights }
    }

    /// Clamps into the search domain; NaN inputs map to the lower bound.
    pub fn clamped(&self) -> Self {
        let clamp = |v: f64, (lo, hi): (f64, f64)| if v.is_nan() { lo } else { v.clamp(lo, hi) };
        Self {
            lambda_exp: clamp(self.lambda_exp, LAMBDA_RANGE),
            sigma_exp: clamp(self.sigma_exp, SIGMA_RANGE),
            weights: self.weights.as_ref().map(|w| w.iter().map(|&v| clamp(v, (0.0, 1.0))).collect()),
        }
    }

    pub fn regularizer(&self) -> f64 {
        10f64.powf(self.lambda_exp)
    }

    pub fn bandwidth(&self) -> f64 {
        10f64.powf(self.sigma_exp)
    }
}

/// Solves `(W K + n'·reg·I) α = W y`, the stationarity condition of the
/// weighted regularized least-squares problem, by LU with partial pivoting.
pub fn solve_weighted_krr(k: &DMatrix<f64>, y: &[f64], w: &[f64], reg: f64) -> Result<DVector<f64>> {
    let n = y.len();
    if k.nrows() != n || k.ncols() != n || w.len() != n {
        return Err(Error::invalid(format!(
            "kernel is {}x{}, {} targets, {} weights",
            k.nrows(),
            k.ncols(),
            n,
            w.len()
        )));
    }
    if !(reg > 0.0) {
        return Err(Error::invalid(format!("regularizer must be positive, got {reg}")));
    }
    let shift = n as f64 * reg;
    let a = DMatrix::from_fn(n, n, |i, j| w[i] * k[(i, j)] + if i == j { shift } else { 0.0 });
    let b = DVector::from_iterator(n, y.iter().zip(w).map(|(yi, wi)| wi * yi));
    let alpha = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numeric("weighted kernel system is singular".into()))?;
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("weighted kernel solve produced non-finite coefficients".into()));
    }
    Ok(alpha)
}

/// Unit-weight kernel ridge regression, `(K + n'·reg·I) α = y`, by Cholesky.
pub fn solve_krr(k: &DMatrix<f64>, y: &[f64], reg: f64) -> Result<DVector<f64>> {
    let n = y.len();
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::invalid(format!("kernel is {}x{}, {} targets", k.nrows(), k.ncols(), n)));
    }
    if !(reg > 0.0) {
        return Err(Error::invalid(format!("regularizer must be positive, got {reg}")));
    }
    let mut a = k.clone();
    for i in 0..n {
        a[(i, i)] += n as f64 * reg;
    }
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Numeric("kernel system is not positive definite".into()))?;
    let alpha = chol.solve(&DVector::from_column_slice(y));
    if alpha.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("kernel solve produced non-finite coefficients".into()));
    }
    Ok(alpha)
}

pub fn gaussian_kernel(sq_dist: f64, bandwidth: f64) -> f64 {
    (-sq_dist / (2.0 * bandwidth * bandwidth)).exp()
}

/// Pairwise squared Euclidean distances between the rows of `x`.
pub fn squared_distances(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (x.row(i) - x.row(j)).norm_squared();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// A cross-validation score with the folds that fell back to ratio 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CvScore {
    pub score: f64,
    pub failed_folds: Vec<usize>,
}

/// Precomputed state for scoring many hyperparameter settings on one
/// dataset and fold split.
#[derive(Debug, Clone)]
pub struct KrrCv {
    dataset: Arc<Dataset>,
    folds: FoldSplit,
    sq_dists: DMatrix<f64>,
    target_mean: f64,
    splits: Vec<(Vec<usize>, Vec<usize>)>,
}

impl KrrCv {
    pub fn new(dataset: Arc<Dataset>, folds: FoldSplit) -> Result<Self> {
        if folds.assignments.len() != dataset.len() {
            return Err(Error::invalid(format!(
                "fold split covers {} samples, dataset has {}",
                folds.assignments.len(),
                dataset.len()
            )));
        }
        let sq_dists = squared_distances(&dataset.features);
        let target_mean = dataset.targets.iter().sum::<f64>() / dataset.len() as f64;
        let splits = (0..folds.num_folds).map(|k| folds.fold_indices(k)).collect();
        Ok(Self { dataset, folds, sq_dists, target_mean, splits })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn folds(&self) -> &FoldSplit {
        &self.folds
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    /// Kernel matrix between two index sets.
    fn kernel(&self, rows: &[usize], cols: &[usize], bandwidth: f64) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            gaussian_kernel(self.sq_dists[(rows[i], cols[j])], bandwidth)
        })
    }

    /// Scores held-out predictions. `predict(train, test)` returns one
    /// prediction per test index, or `None` on numerical failure.
    pub fn score_with<P>(&self, mut predict: P) -> CvScore
    where
        P: FnMut(&[usize], &[usize]) -> Option<Vec<f64>>,
    {
        let y = &self.dataset.targets;
        let mut failed_folds = Vec::new();
        let mut ratio_sum = 0.0;
        for (k, (train, test)) in self.splits.iter().enumerate() {
            let denom: f64 = test.iter().map(|&i| (self.target_mean - y[i]).powi(2)).sum();
            let ratio = predict(train, test).and_then(|pred| {
                let num: f64 = test.iter().zip(&pred).map(|(&i, p)| (p - y[i]).powi(2)).sum();
                let r = num / denom;
                r.is_finite().then_some(r)
            });
            match ratio {
                Some(r) => ratio_sum += r,
                None => {
                    failed_folds.push(k);
                    ratio_sum += 1.0;
                }
            }
        }
        if !failed_folds.is_empty() {
            log::debug!("{}: folds {failed_folds:?} fell back to zero skill", self.dataset.name);
        }
        CvScore { score: 1.0 - ratio_sum / self.splits.len() as f64, failed_folds }
    }

    /// Cross-validated score of `hp` after clamping it into the domain.
    pub fn score(&self, hp: &KrrHyperparams) -> CvScore {
        let hp = hp.clamped();
        let reg = hp.regularizer();
        let bw = hp.bandwidth();
        let y = &self.dataset.targets;
        if let Some(w) = &hp.weights {
            if w.len() != self.dataset.len() {
                log::warn!("{} weights for {} samples", w.len(), self.dataset.len());
                return CvScore { score: 0.0, failed_folds: (0..self.splits.len()).collect() };
            }
        }
        self.score_with(|train, test| {
            let k_train = self.kernel(train, train, bw);
            let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let alpha = match &hp.weights {
                None => solve_krr(&k_train, &y_train, reg),
                Some(w) => {
                    let w_train: Vec<f64> = train.iter().map(|&i| w[i]).collect();
                    solve_weighted_krr(&k_train, &y_train, &w_train, reg)
                }
            }
            .ok()?;
            let pred = self.kernel(test, train, bw) * alpha;
            Some(pred.iter().copied().collect())
        })
    }
}

/// Cross-validated kernel ridge regression score of `hp` on `dataset`.
pub fn krr_cv_score(dataset: &Dataset, folds: &FoldSplit, hp: &KrrHyperparams) -> Result<CvScore> {
    Ok(KrrCv::new(Arc::new(dataset.clone()), folds.clone())?.score(hp))
}

/// The cross-validation score as a black box over `(λ, σ)`, or over
/// `(λ, σ, w_1, …, w_n)` when weighted. Returns a score to maximize.
#[derive(Debug, Clone)]
pub struct KrrObjective {
    cv: Arc<KrrCv>,
    weighted: bool,
    domain: SearchBox,
}

impl KrrObjective {
    pub fn new(cv: Arc<KrrCv>, weighted: bool) -> Self {
        let n = if weighted { cv.dataset().len() } else { 0 };
        let mut lower = vec![LAMBDA_RANGE.0, SIGMA_RANGE.0];
        let mut upper = vec![LAMBDA_RANGE.1, SIGMA_RANGE.1];
        lower.extend(std::iter::repeat_n(0.0, n));
        upper.extend(std::iter::repeat_n(1.0, n));
        let domain = SearchBox::new(lower, upper).expect("static KRR domain is valid");
        Self { cv, weighted, domain }
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn cv(&self) -> &KrrCv {
        &self.cv
    }
}

impl Objective for KrrObjective {
    fn domain(&self) -> &SearchBox {
        &self.domain
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        self.cv.score(&KrrHyperparams::from_point(x)).score
    }
}
