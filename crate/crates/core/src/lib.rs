//! Derivative-free minimization of black-box functions over boxes.
//!
//! The main optimizer, [`gradopt::run_gradopt`], runs online gradient descent
//! on a sequence of Gaussian-smoothed surrogates of the objective. Gradients
//! are two-point estimates along random Gaussian directions, step sizes are
//! per-coordinate and scale free, and the smoothing radius halves at every
//! epoch.
//!
//! Alongside it live two comparators ([`baselines`]), a set of benchmark
//! objectives including cross-validated kernel ridge regression
//! ([`objectives`]), and an experiment harness measuring evaluations-to-target
//! ([`harness`]).
//!
//! With the default `parallel` feature, Monte-Carlo estimates and independent
//! benchmark runs are spread over a rayon thread pool. Without it everything
//! runs on the calling thread and produces the same bits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod domain;
pub mod error;
pub mod gradopt;
pub mod harness;
pub mod objective;
pub mod objectives;
pub mod parallel;
pub mod rng;
pub mod run;
pub mod smoothing;

pub use domain::SearchBox;
pub use error::{Error, Result};
pub use objective::{Counted, FnObjective, Negated, Objective};
pub use parallel::Parallelism;
pub use run::{EvaluationFailure, RunResult};
