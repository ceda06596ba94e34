//! Graduated optimization with two-point Gaussian gradient estimates.
//!
//! A run is split into epochs. Epoch `m` minimizes the Gaussian smoothing
//! `f_δ(x) = E[f(x + δu)]`, `u ~ N(0, I)`, at a fixed radius `δ_m` by
//! projected online gradient descent, and the radius halves between epochs.
//! Gradients of `f_δ` are estimated from two evaluations,
//!
//! ```text
//! g = (d / δ) · (f(x + δu) − f(x)) · u
//! ```
//!
//! and the step on coordinate `i` is `g_i / sqrt(Σ_t g_{t,i}²)`, which needs
//! no learning rate and is unchanged when `f` is multiplied by a positive
//! constant.
//!
//! The budget counts objective evaluations. Each iteration costs two, so a
//! budget `B` buys `floor(B / 2)` iterations, shared evenly between epochs.

use crate::domain::{project_box, SearchBox};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::{gaussian_vector, seeded, SeededRng};
use crate::run::{checked_eval, EvaluationFailure, RunResult, TraceRecorder};

/// Number of epochs used when none is configured.
pub const DEFAULT_EPOCHS: usize = 5;

/// How the first iterate is chosen.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitPoint {
    /// Uniform in the box, drawn from the run's seeded generator.
    #[default]
    Uniform,
    Center,
    /// A caller-supplied point, which must lie in the box.
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradOptConfig {
    /// Objective evaluations available to the run.
    pub total_eval_budget: usize,
    pub num_epochs: usize,
    pub init: InitPoint,
    pub seed: u64,
    /// Clear the accumulated squared gradients at every epoch boundary.
    /// Off by default: the accumulator lives for the whole run.
    pub reset_per_epoch: bool,
}

impl GradOptConfig {
    pub fn new(total_eval_budget: usize, seed: u64) -> Self {
        Self {
            total_eval_budget,
            num_epochs: DEFAULT_EPOCHS,
            init: InitPoint::Uniform,
            seed,
            reset_per_epoch: false,
        }
    }

    pub fn epochs(mut self, m: usize) -> Self {
        self.num_epochs = m;
        self
    }

    pub fn init(mut self, init: InitPoint) -> Self {
        self.init = init;
        self
    }

    pub fn reset_per_epoch(mut self, reset: bool) -> Self {
        self.reset_per_epoch = reset;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_epochs == 0 {
            return Err(Error::invalid("number of epochs must be positive"));
        }
        if self.total_eval_budget < 2 * self.num_epochs {
            return Err(Error::invalid(format!(
                "budget {} cannot give {} epochs at least one two-evaluation iteration each",
                self.total_eval_budget, self.num_epochs
            )));
        }
        Ok(())
    }
}

/// One epoch: a smoothing radius and the iterations run at it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epoch {
    pub delta: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochSchedule {
    pub entries: Vec<Epoch>,
}

impl EpochSchedule {
    pub fn total_iterations(&self) -> usize {
        self.entries.iter().map(|e| e.iterations).sum()
    }

    /// Objective evaluations the schedule will consume.
    pub fn total_evaluations(&self) -> usize {
        2 * self.total_iterations()
    }

    pub fn initial_delta(&self) -> f64 {
        self.entries[0].delta
    }
}

/// Builds the epoch schedule for `budget` evaluations over `epochs` epochs.
///
/// `δ_1` is half the box diameter and each later radius is half the previous
/// one. The `floor(budget / 2)` iterations are split as evenly as possible,
/// earlier epochs taking one extra iteration each until the remainder is used.
pub fn make_epoch_schedule(domain: &SearchBox, budget: usize, epochs: usize) -> Result<EpochSchedule> {
    if epochs == 0 {
        return Err(Error::invalid("number of epochs must be positive"));
    }
    if budget < 2 * epochs {
        return Err(Error::invalid(format!(
            "budget {budget} is less than twice the number of epochs ({epochs})"
        )));
    }
    let diameter = domain.diameter();
    if diameter <= 0.0 {
        return Err(Error::invalid("box has zero diameter, initial smoothing radius would be 0"));
    }
    let iterations = budget / 2;
    let base = iterations / epochs;
    let extra = iterations % epochs;
    let mut delta = diameter / 2.0;
    let mut entries = Vec::with_capacity(epochs);
    for m in 0..epochs {
        entries.push(Epoch { delta, iterations: base + usize::from(m < extra) });
        delta /= 2.0;
    }
    Ok(EpochSchedule { entries })
}

/// A two-point gradient estimate together with the two raw evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub g: Vec<f64>,
    pub f_x: f64,
    pub f_probe: f64,
}

/// `x + δu`.
pub fn probe_point(x: &[f64], delta: f64, u: &[f64]) -> Vec<f64> {
    x.iter().zip(u).map(|(xi, ui)| xi + delta * ui).collect()
}

/// `(d / δ)(f_probe − f_x) u`.
pub fn two_point_gradient(f_x: f64, f_probe: f64, delta: f64, u: &[f64]) -> Vec<f64> {
    let scale = (u.len() as f64 / delta) * (f_probe - f_x);
    u.iter().map(|ui| scale * ui).collect()
}

/// Estimates the gradient of the smoothed objective at `x` along direction
/// `u`, which the caller draws from the standard Gaussian. Makes exactly two
/// calls to `f`: at `x`, then at `x + δu`.
pub fn estimate_gradient<O: Objective + ?Sized>(
    f: &O,
    x: &[f64],
    delta: f64,
    u: &[f64],
) -> Result<GradientEstimate> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("smoothing radius must be positive, got {delta}")));
    }
    if x.len() != u.len() {
        return Err(Error::invalid(format!(
            "point has dimension {} but direction has dimension {}",
            x.len(),
            u.len()
        )));
    }
    let f_x = checked_eval(f, x)?;
    let f_probe = checked_eval(f, &probe_point(x, delta, u))?;
    Ok(GradientEstimate { g: two_point_gradient(f_x, f_probe, delta, u), f_x, f_probe })
}

/// Per-coordinate accumulated squared gradients of scale-free online
/// gradient descent.
#[derive(Debug, Clone, PartialEq)]
pub struct SfogdState {
    eta: Vec<f64>,
}

impl SfogdState {
    pub fn new(dim: usize) -> Self {
        Self { eta: vec![0.0; dim] }
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn reset(&mut self) {
        self.eta.iter_mut().for_each(|e| *e = 0.0);
    }

    /// Accumulates `g²` and returns the unprojected step
    /// `x_i − g_i / sqrt(η_i)`. Coordinates whose accumulator is still zero
    /// do not move.
    ///
    /// A non-finite `g` component is rejected before the state is touched.
    pub fn step(&mut self, x: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.eta.len() || g.len() != self.eta.len() {
            return Err(Error::invalid(format!(
                "state has dimension {}, point {}, gradient {}",
                self.eta.len(),
                x.len(),
                g.len()
            )));
        }
        if let Some(&bad) = g.iter().find(|gi| !gi.is_finite()) {
            return Err(Error::EvaluationFailed { point: x.to_vec(), value: bad });
        }
        Ok(self
            .eta
            .iter_mut()
            .zip(x.iter().zip(g))
            .map(|(eta, (xi, gi))| {
                *eta += gi * gi;
                if *eta > 0.0 {
                    xi - gi / eta.sqrt()
                } else {
                    *xi
                }
            })
            .collect())
    }
}

/// What happened in one iteration of [`GradOpt::step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// Zero-based epoch index.
    pub epoch: usize,
    pub delta: f64,
    /// The iterate at which the gradient was estimated.
    pub iterate: Vec<f64>,
    pub gradient: Vec<f64>,
    /// The projected next iterate.
    pub next_iterate: Vec<f64>,
}

/// A GradOpt run that can be advanced one iteration at a time.
pub struct GradOpt<'f, O: ?Sized> {
    objective: &'f O,
    domain: SearchBox,
    schedule: EpochSchedule,
    state: SfogdState,
    reset_per_epoch: bool,
    x: Vec<f64>,
    rng: SeededRng,
    seed: u64,
    epoch: usize,
    done_in_epoch: usize,
    recorder: TraceRecorder,
    failure: Option<EvaluationFailure>,
}

impl<'f, O: Objective + ?Sized> GradOpt<'f, O> {
    pub fn new(objective: &'f O, domain: &SearchBox, config: &GradOptConfig) -> Result<Self> {
        config.validate()?;
        if objective.dimension() != domain.dim() {
            return Err(Error::invalid(format!(
                "objective has dimension {} but box has dimension {}",
                objective.dimension(),
                domain.dim()
            )));
        }
        let schedule = make_epoch_schedule(domain, config.total_eval_budget, config.num_epochs)?;
        let mut rng = seeded(config.seed, 0);
        let x = match &config.init {
            InitPoint::Uniform => domain.sample_uniform(&mut rng),
            InitPoint::Center => domain.center(),
            InitPoint::Point(p) => {
                if !domain.contains(p) {
                    return Err(Error::invalid("initial point lies outside the box"));
                }
                p.clone()
            }
        };
        Ok(Self {
            objective,
            domain: domain.clone(),
            schedule,
            state: SfogdState::new(domain.dim()),
            reset_per_epoch: config.reset_per_epoch,
            x,
            rng,
            seed: config.seed,
            epoch: 0,
            done_in_epoch: 0,
            recorder: TraceRecorder::new(config.total_eval_budget),
            failure: None,
        })
    }

    pub fn schedule(&self) -> &EpochSchedule {
        &self.schedule
    }

    pub fn state(&self) -> &SfogdState {
        &self.state
    }

    pub fn current(&self) -> &[f64] {
        &self.x
    }

    pub fn evals_used(&self) -> usize {
        self.recorder.len()
    }

    pub fn is_finished(&self) -> bool {
        self.failure.is_some()
            || self.epoch >= self.schedule.entries.len()
            || self.recorder.remaining() < 2
    }

    /// Runs one iteration. Returns `Ok(None)` once the schedule is exhausted
    /// or the run has failed; a failing evaluation is reported once as an
    /// error and ends the run.
    pub fn step(&mut self) -> Result<Option<StepReport>> {
        if self.is_finished() {
            return Ok(None);
        }
        let Epoch { delta, .. } = self.schedule.entries[self.epoch];
        let u = gaussian_vector(&mut self.rng, self.domain.dim());

        let f_x = self.eval(self.x.clone())?;
        let f_probe = self.eval(probe_point(&self.x, delta, &u))?;
        let g = two_point_gradient(f_x, f_probe, delta, &u);

        let stepped = match self.state.step(&self.x, &g) {
            Ok(s) => s,
            Err(e) => {
                if let Error::EvaluationFailed { point, value } = &e {
                    self.failure = Some(EvaluationFailure { point: point.clone(), value: *value });
                }
                return Err(e);
            }
        };
        let next = project_box(&stepped, &self.domain)?;
        let report = StepReport {
            epoch: self.epoch,
            delta,
            iterate: std::mem::replace(&mut self.x, next.clone()),
            gradient: g,
            next_iterate: next,
        };

        self.done_in_epoch += 1;
        if self.done_in_epoch == self.schedule.entries[self.epoch].iterations {
            self.epoch += 1;
            self.done_in_epoch = 0;
            if self.reset_per_epoch {
                self.state.reset();
            }
        }
        Ok(Some(report))
    }

    fn eval(&mut self, point: Vec<f64>) -> Result<f64> {
        match checked_eval(self.objective, &point) {
            Ok(v) => {
                self.recorder.push(point, v);
                Ok(v)
            }
            Err(fail) => {
                self.failure = Some(fail.clone());
                Err(fail.into())
            }
        }
    }

    pub fn finish(self) -> RunResult {
        self.recorder.finish(self.seed, self.failure)
    }
}

/// Minimizes `f` over `domain` with GradOpt.
///
/// A non-finite evaluation stops the run; the partial result is returned with
/// [`RunResult::failure`] set. Invalid configurations are errors.
pub fn run_gradopt<O: Objective + ?Sized>(
    f: &O,
    domain: &SearchBox,
    config: &GradOptConfig,
) -> Result<RunResult> {
    let mut run = GradOpt::new(f, domain, config)?;
    loop {
        match run.step() {
            Ok(Some(_)) => {}
            Ok(None) => break,
            Err(Error::EvaluationFailed { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    if let Some(fail) = &run.failure {
        log::warn!("gradopt run (seed {}) aborted: non-finite value {} at {:?}", run.seed, fail.value, fail.point);
    }
    Ok(run.finish())
}
