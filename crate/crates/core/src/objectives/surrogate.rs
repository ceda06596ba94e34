//! A cheap stand-in for the weighted cross-validation objective.
//!
//! Same domain as weighted kernel ridge regression, `[−2,4] × [−5,5] ×
//! [0,1]^n`, but the score is a separable quadratic,
//!
//! ```text
//! 1 − s · Σ_i c_i ((x_i − t_i) / range_i)²,    Σ c_i = 1,
//! ```
//!
//! with seeded optimum `t` and seeded positive coordinate weights `c`. The
//! maximum is exactly 1. The optimum is drawn from the middle 80% of each
//! range, so a uniform random point scores around `1 − 0.137 s`.

use rand::Rng;

use crate::domain::SearchBox;
use crate::objective::Objective;
use crate::rng::seeded;

use super::krr::{LAMBDA_RANGE, SIGMA_RANGE};

/// Default curvature `s`: uniform points score about 0.18.
pub const DEFAULT_SHARPNESS: f64 = 6.0;

#[derive(Debug, Clone)]
pub struct WeightedQuadraticSurrogate {
    domain: SearchBox,
    optimum: Vec<f64>,
    coefficients: Vec<f64>,
}

impl WeightedQuadraticSurrogate {
    pub fn new(num_weights: usize, sharpness: f64, seed: u64) -> Self {
        let mut lower = vec![LAMBDA_RANGE.0, SIGMA_RANGE.0];
        let mut upper = vec![LAMBDA_RANGE.1, SIGMA_RANGE.1];
        lower.extend(std::iter::repeat_n(0.0, num_weights));
        upper.extend(std::iter::repeat_n(1.0, num_weights));
        let domain = SearchBox::new(lower, upper).expect("static surrogate domain is valid");

        let mut rng = seeded(seed, 0);
        let optimum = domain
            .lower()
            .iter()
            .zip(domain.upper())
            .map(|(lo, hi)| lo + rng.gen_range(0.1..0.9) * (hi - lo))
            .collect();
        let raw: Vec<f64> = (0..domain.dim()).map(|_| rng.gen_range(0.5..1.5)).collect();
        let total: f64 = raw.iter().sum();
        let coefficients = domain
            .lower()
            .iter()
            .zip(domain.upper())
            .zip(&raw)
            .map(|((lo, hi), r)| sharpness * r / total / ((hi - lo) * (hi - lo)))
            .collect();
        Self { domain, optimum, coefficients }
    }

    pub fn optimum(&self) -> &[f64] {
        &self.optimum
    }
}

impl Objective for WeightedQuadraticSurrogate {
    fn domain(&self) -> &SearchBox {
        &self.domain
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        1.0 - x
            .iter()
            .zip(&self.optimum)
            .zip(&self.coefficients)
            .map(|((xi, ti), ci)| ci * (xi - ti) * (xi - ti))
            .sum::<f64>()
    }
}
