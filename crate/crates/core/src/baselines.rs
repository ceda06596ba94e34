//! Comparator optimizers: pure random search and AdaLipo.
//!
//! Both minimize, like [`crate::gradopt::run_gradopt`]. AdaLipo reasons about
//! upper bounds of the score `h = −f` internally.
//!
//! Randomness protocol: uniform points (including rejected AdaLipo
//! candidates) come from stream 0 of the run seed, and AdaLipo's
//! explore-or-exploit coin flips from stream 1. Random search draws only from
//! stream 0, so AdaLipo with exploration probability 1 evaluates exactly the
//! points random search does.

use rand::Rng;

use crate::domain::SearchBox;
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::seeded;
use crate::run::{checked_eval, RunResult, TraceRecorder};

fn check_dims<O: Objective + ?Sized>(f: &O, domain: &SearchBox) -> Result<()> {
    if f.dimension() != domain.dim() {
        return Err(Error::invalid(format!(
            "objective has dimension {} but box has dimension {}",
            f.dimension(),
            domain.dim()
        )));
    }
    Ok(())
}

/// Pure random search: `budget` independent uniform points.
pub fn run_prs<O: Objective + ?Sized>(f: &O, domain: &SearchBox, budget: usize, seed: u64) -> Result<RunResult> {
    check_dims(f, domain)?;
    if budget == 0 {
        return Err(Error::invalid("budget must be positive"));
    }
    let mut points = seeded(seed, 0);
    let mut rec = TraceRecorder::new(budget);
    for _ in 0..budget {
        let x = domain.sample_uniform(&mut points);
        match checked_eval(f, &x) {
            Ok(v) => rec.push(x, v),
            Err(fail) => return Ok(rec.finish(seed, Some(fail))),
        }
    }
    Ok(rec.finish(seed, None))
}

/// Smallest value on the grid `{base^i : i ∈ Z}` that is at least the
/// largest observed slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzEstimate {
    pub k_hat: f64,
    /// The raw maximum slope behind the estimate.
    pub max_slope: f64,
}

/// Rounds `slope` up to the grid `base^i`. Zero maps to zero.
pub fn round_up_to_grid(slope: f64, base: f64) -> f64 {
    if slope <= 0.0 {
        return 0.0;
    }
    let mut exp = (slope.ln() / base.ln()).ceil() as i32;
    // the logarithm can be off by one ulp either way
    while base.powi(exp) < slope {
        exp += 1;
    }
    while base.powi(exp - 1) >= slope {
        exp -= 1;
    }
    base.powi(exp)
}

/// Estimates the Lipschitz constant of the evaluated history.
pub fn estimate_lipschitz(history: &[(Vec<f64>, f64)], grid_base: f64) -> Result<LipschitzEstimate> {
    if !(grid_base > 1.0) {
        return Err(Error::invalid(format!("grid base must exceed 1, got {grid_base}")));
    }
    let mut max_slope = 0.0f64;
    let mut distinct_pair = false;
    for (i, (xi, fi)) in history.iter().enumerate() {
        for (xj, fj) in &history[..i] {
            let dist = euclidean(xi, xj);
            if dist > 0.0 {
                distinct_pair = true;
                max_slope = max_slope.max((fi - fj).abs() / dist);
            }
        }
    }
    if !distinct_pair {
        return Err(Error::invalid("Lipschitz estimate needs at least two distinct points"));
    }
    Ok(LipschitzEstimate { k_hat: round_up_to_grid(max_slope, grid_base), max_slope })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Upper bound on the score `h` at `x` implied by slope `k` and the history
/// (given as losses `f = −h`): `min_i (h_i + k‖x − x_i‖)`.
pub fn score_upper_bound(history: &[(Vec<f64>, f64)], k: f64, x: &[f64]) -> f64 {
    history
        .iter()
        .map(|(xi, fi)| -fi + k * euclidean(x, xi))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaLipoConfig {
    /// Probability of evaluating a uniform point unconditionally.
    pub exploration_prob: f64,
    /// Base of the Lipschitz grid `(1 + α)^i`.
    pub grid_base: f64,
    /// Rejected candidates tolerated before falling back to a uniform
    /// point. `None` means `10 · d · budget`.
    pub rejection_cap: Option<usize>,
    pub seed: u64,
}

impl AdaLipoConfig {
    pub fn new(seed: u64) -> Self {
        Self { exploration_prob: 0.1, grid_base: 1.01, rejection_cap: None, seed }
    }

    pub fn exploration_prob(mut self, p: f64) -> Self {
        self.exploration_prob = p;
        self
    }

    fn validate(&self) -> Result<()> {
        // p = 1 is accepted as a degenerate pure-exploration setting
        if !(self.exploration_prob > 0.0 && self.exploration_prob <= 1.0) {
            return Err(Error::invalid(format!(
                "exploration probability must be in (0, 1], got {}",
                self.exploration_prob
            )));
        }
        if !(self.grid_base > 1.0) {
            return Err(Error::invalid(format!("grid base must exceed 1, got {}", self.grid_base)));
        }
        if self.rejection_cap == Some(0) {
            return Err(Error::invalid("rejection cap must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LipoMove {
    First,
    Explore,
    Exploit,
    /// Every candidate up to the cap was rejected; a uniform point was used.
    Fallback,
}

/// Per-evaluation record of an AdaLipo run.
#[derive(Debug, Clone, PartialEq)]
pub struct LipoStep {
    pub kind: LipoMove,
    /// Lipschitz estimate in force when the point was chosen.
    pub k_hat: f64,
    pub rejected: usize,
}

/// AdaLipo; see [`run_adalipo_traced`].
pub fn run_adalipo<O: Objective + ?Sized>(
    f: &O,
    domain: &SearchBox,
    budget: usize,
    cfg: &AdaLipoConfig,
) -> Result<RunResult> {
    run_adalipo_traced(f, domain, budget, cfg).map(|(r, _)| r)
}

/// Runs AdaLipo and also returns how each point was chosen.
///
/// The first point is uniform. Afterwards, with probability `p` a uniform
/// point is evaluated; otherwise uniform candidates are drawn until one's
/// Lipschitz upper bound on the score reaches the best score so far. The
/// Lipschitz estimate is refreshed after every evaluation.
pub fn run_adalipo_traced<O: Objective + ?Sized>(
    f: &O,
    domain: &SearchBox,
    budget: usize,
    cfg: &AdaLipoConfig,
) -> Result<(RunResult, Vec<LipoStep>)> {
    check_dims(f, domain)?;
    cfg.validate()?;
    if budget == 0 {
        return Err(Error::invalid("budget must be positive"));
    }
    let cap = cfg.rejection_cap.unwrap_or(10 * domain.dim() * budget);
    let mut points = seeded(cfg.seed, 0);
    let mut coins = seeded(cfg.seed, 1);
    let mut rec = TraceRecorder::new(budget);
    let mut steps = Vec::with_capacity(budget);
    let mut max_slope = 0.0f64;
    let mut k_hat = 0.0;

    for t in 0..budget {
        let (x, step) = if t == 0 {
            (domain.sample_uniform(&mut points), LipoStep { kind: LipoMove::First, k_hat, rejected: 0 })
        } else if coins.gen::<f64>() < cfg.exploration_prob {
            (domain.sample_uniform(&mut points), LipoStep { kind: LipoMove::Explore, k_hat, rejected: 0 })
        } else {
            // best score so far is −(best loss)
            let best_score = -rec.best_value().expect("history is non-empty");
            let mut rejected = 0;
            loop {
                let cand = domain.sample_uniform(&mut points);
                if score_upper_bound(rec.history(), k_hat, &cand) >= best_score {
                    break (cand, LipoStep { kind: LipoMove::Exploit, k_hat, rejected });
                }
                rejected += 1;
                if rejected == cap {
                    log::debug!("adalipo: {cap} candidates rejected at t = {t}; sampling uniformly");
                    break (
                        domain.sample_uniform(&mut points),
                        LipoStep { kind: LipoMove::Fallback, k_hat, rejected },
                    );
                }
            }
        };

        let v = match checked_eval(f, &x) {
            Ok(v) => v,
            Err(fail) => return Ok((rec.finish(cfg.seed, Some(fail)), steps)),
        };
        for (xi, fi) in rec.history() {
            let dist = euclidean(&x, xi);
            if dist > 0.0 {
                max_slope = max_slope.max((v - fi).abs() / dist);
            }
        }
        k_hat = round_up_to_grid(max_slope, cfg.grid_base);
        rec.push(x, v);
        steps.push(step);
    }
    Ok((rec.finish(cfg.seed, None), steps))
}
