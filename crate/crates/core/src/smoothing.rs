//! Monte-Carlo estimates over Gaussian directions.
//!
//! Draws are split into fixed-size chunks, each with its own seeded
//! generator, and chunk statistics are merged in chunk order. The result is
//! therefore the same whether chunks run on one thread or many.

use crate::error::{Error, Result};
use crate::gradopt::{estimate_gradient, probe_point};
use crate::objective::Objective;
use crate::parallel::Parallelism;
use crate::rng::{derive_seed, gaussian_vector, seeded};

/// Draws per independently seeded chunk.
pub const CHUNK: usize = 8192;

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

/// Running mean and centred second moment, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * self.n * other.n / n,
        }
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        McEstimate { mean: self.mean, std_error: (var / self.n).sqrt(), samples: self.n as usize }
    }
}

fn chunked<F>(samples: usize, dim: usize, seed: u64, par: Parallelism, body: F) -> Result<Vec<Moments>>
where
    F: Fn(&[f64], &mut [Moments]) -> Result<()> + Sync + Send,
{
    if samples == 0 {
        return Err(Error::invalid("Monte-Carlo estimate needs at least one sample"));
    }
    let chunks = samples.div_ceil(CHUNK);
    let parts = par.map_indexed(chunks, |c| -> Result<Vec<Moments>> {
        let mut rng = seeded(derive_seed(seed, &[c as u64]), 0);
        let n = CHUNK.min(samples - c * CHUNK);
        let mut acc = vec![Moments::default(); dim];
        for _ in 0..n {
            let u = gaussian_vector(&mut rng, dim);
            body(&u, &mut acc)?;
        }
        Ok(acc)
    });
    let mut total = vec![Moments::default(); dim];
    for part in parts {
        for (t, p) in total.iter_mut().zip(part?) {
            *t = t.merge(p);
        }
    }
    Ok(total)
}

/// Estimates `f_δ(x) = E[f(x + δu)]`.
pub fn smoothed_value<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    delta: f64,
    samples: usize,
    seed: u64,
    par: Parallelism,
) -> Result<McEstimate> {
    let m = chunked(samples, x.len(), seed, par, |u, acc| {
        let p = probe_point(x, delta, u);
        let v = f.evaluate(&p);
        if !v.is_finite() {
            return Err(Error::EvaluationFailed { point: p, value: v });
        }
        acc[0].push(v);
        Ok(())
    })?;
    Ok(m[0].estimate())
}

/// Per-coordinate mean of the two-point gradient estimator at `x`.
pub fn estimator_mean<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    delta: f64,
    samples: usize,
    seed: u64,
    par: Parallelism,
) -> Result<Vec<McEstimate>> {
    let m = chunked(samples, x.len(), seed, par, |u, acc| {
        let est = estimate_gradient(f, x, delta, u)?;
        for (a, gi) in acc.iter_mut().zip(&est.g) {
            a.push(*gi);
        }
        Ok(())
    })?;
    Ok(m.iter().map(Moments::estimate).collect())
}
