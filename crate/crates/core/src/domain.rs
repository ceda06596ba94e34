use rand::Rng;

use crate::error::{Error, Result};

/// Axis-aligned box `[lower, upper]` in R^d.
///
/// Equal bounds on a coordinate are allowed and freeze that coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::invalid("box must have at least one dimension"));
        }
        if lower.len() != upper.len() {
            return Err(Error::invalid(format!(
                "bound lengths differ: {} lower vs {} upper",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid(format!("non-finite bound on coordinate {i}")));
            }
            if lo > hi {
                return Err(Error::invalid(format!(
                    "coordinate {i}: lower {lo} exceeds upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The box `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Euclidean length of the main diagonal, i.e. `max ‖x − y‖₂` over the box.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    /// Whether `point` lies in the box inflated by `margin` in sup-norm.
    pub fn contains_inflated(&self, point: &[f64], margin: f64) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| lo - margin <= *x && *x <= hi + margin)
    }

    /// Draws a point uniformly from the box. Consumes exactly `dim` uniform
    /// draws from `rng`, frozen coordinates included.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| {
                let t: f64 = rng.gen();
                lo + t * (hi - lo)
            })
            .collect()
    }
}

/// Euclidean projection onto `domain`: per-coordinate clamping.
///
/// Negative zero is normalized to `+0.0` so projected points compare
/// bitwise-equal regardless of the sign of an incoming zero.
pub fn project_box(point: &[f64], domain: &SearchBox) -> Result<Vec<f64>> {
    if point.len() != domain.dim() {
        return Err(Error::invalid(format!(
            "point has dimension {} but box has dimension {}",
            point.len(),
            domain.dim()
        )));
    }
    Ok(point
        .iter()
        .zip(domain.lower.iter().zip(&domain.upper))
        .map(|(x, (lo, hi))| x.clamp(*lo, *hi) + 0.0)
        .collect())
}
