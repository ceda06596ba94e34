use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::domain::SearchBox;

/// A black-box function on a box.
///
/// Implementations must be deterministic and must accept points slightly
/// outside [`Objective::domain`]: gradient probes may leave the box by up to
/// the initial smoothing radius on each coordinate.
pub trait Objective: Send + Sync {
    fn domain(&self) -> &SearchBox;

    fn evaluate(&self, x: &[f64]) -> f64;

    fn dimension(&self) -> usize {
        self.domain().dim()
    }

    /// Known Lipschitz constant with respect to the Euclidean norm, if any.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }
}

impl<O: Objective + ?Sized> Objective for &O {
    fn domain(&self) -> &SearchBox {
        (**self).domain()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        (**self).lipschitz_hint()
    }
}

impl<O: Objective + ?Sized> Objective for Arc<O> {
    fn domain(&self) -> &SearchBox {
        (**self).domain()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        (**self).lipschitz_hint()
    }
}

impl<O: Objective + ?Sized> Objective for Box<O> {
    fn domain(&self) -> &SearchBox {
        (**self).domain()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        (**self).lipschitz_hint()
    }
}

/// Closure-backed objective.
pub struct FnObjective<F> {
    domain: SearchBox,
    f: F,
    lipschitz: Option<f64>,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    pub fn new(domain: SearchBox, f: F) -> Self {
        Self { domain, f, lipschitz: None }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = Some(l);
        self
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn domain(&self) -> &SearchBox {
        &self.domain
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// Counts evaluations of the wrapped objective.
pub struct Counted<O> {
    inner: O,
    count: AtomicU64,
}

impl<O: Objective> Counted<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, count: AtomicU64::new(0) }
    }

    pub fn eval_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Objective> Objective for Counted<O> {
    fn domain(&self) -> &SearchBox {
        self.inner.domain()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(x)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        self.inner.lipschitz_hint()
    }
}

/// `x ↦ −f(x)`: turns a score to maximize into a loss to minimize.
pub struct Negated<O>(pub O);

impl<O: Objective> Objective for Negated<O> {
    fn domain(&self) -> &SearchBox {
        self.0.domain()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        -self.0.evaluate(x)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        self.0.lipschitz_hint()
    }
}
