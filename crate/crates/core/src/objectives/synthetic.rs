use crate::domain::SearchBox;
use crate::error::{Error, Result};
use crate::objective::Objective;

/// Closed-form test losses.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticFunction {
    /// `‖x‖²`
    Sphere,
    /// `‖x − c‖²`
    ShiftedSphere { center: f64 },
    /// `Σ 100(x_{i+1} − x_i²)² + (1 − x_i)²`
    Rosenbrock,
    /// `‖x‖₁`
    L1Cone,
}

impl SyntheticFunction {
    pub const NAMES: [&'static str; 4] = ["sphere", "shifted-sphere", "rosenbrock", "l1-cone"];

    /// Parses a function name. `shifted-sphere` is centred at 0.5 on every
    /// coordinate.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sphere" => Ok(Self::Sphere),
            "shifted-sphere" => Ok(Self::ShiftedSphere { center: 0.5 }),
            "rosenbrock" => Ok(Self::Rosenbrock),
            "l1-cone" => Ok(Self::L1Cone),
            other => Err(Error::invalid(format!(
                "unknown synthetic function {other:?}; expected one of {:?}",
                Self::NAMES
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Sphere => "sphere",
            Self::ShiftedSphere { .. } => "shifted-sphere",
            Self::Rosenbrock => "rosenbrock",
            Self::L1Cone => "l1-cone",
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Sphere => x.iter().map(|v| v * v).sum(),
            Self::ShiftedSphere { center } => x.iter().map(|v| (v - center) * (v - center)).sum(),
            Self::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum(),
            Self::L1Cone => x.iter().map(|v| v.abs()).sum(),
        }
    }

    /// The box each function is usually searched over.
    pub fn default_domain(&self, dim: usize) -> Result<SearchBox> {
        match self {
            Self::Rosenbrock => SearchBox::cube(dim, -2.0, 2.0),
            _ => SearchBox::cube(dim, -1.0, 1.0),
        }
    }

    /// Euclidean Lipschitz constant over all of R^d, when one exists.
    pub fn lipschitz(&self, dim: usize) -> Option<f64> {
        match self {
            Self::L1Cone => Some((dim as f64).sqrt()),
            _ => None,
        }
    }
}

/// Evaluates the named synthetic function.
pub fn eval_synthetic(name: &str, x: &[f64]) -> Result<f64> {
    Ok(SyntheticFunction::from_name(name)?.eval(x))
}

#[derive(Debug, Clone)]
pub struct SyntheticObjective {
    pub function: SyntheticFunction,
    domain: SearchBox,
}

impl SyntheticObjective {
    pub fn new(function: SyntheticFunction, domain: SearchBox) -> Self {
        Self { function, domain }
    }

    pub fn with_default_domain(function: SyntheticFunction, dim: usize) -> Result<Self> {
        let domain = function.default_domain(dim)?;
        Ok(Self { function, domain })
    }
}

impl Objective for SyntheticObjective {
    fn domain(&self) -> &SearchBox {
        &self.domain
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        self.function.eval(x)
    }
    fn lipschitz_hint(&self) -> Option<f64> {
        self.function.lipschitz(self.domain.dim())
    }
}
