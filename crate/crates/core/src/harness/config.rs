//! Experiment configuration, read from TOML.
//!
//! ```toml
//! budget = 1000
//! repetitions = 100
//! targets = [0.90, 0.95, 0.99]
//! master_seed = 1
//!
//! [[problems]]
//! kind = "synthetic"
//! name = "Sphere2"
//! function = "sphere"
//! dimension = 2
//!
//! [[problems]]
//! kind = "krr"
//! name = "Housing"
//! manifest = "data/housing.toml"
//! weighted = false
//!
//! [[algorithms]]
//! kind = "gradopt"
//! epochs = 5
//!
//! [[algorithms]]
//! kind = "prs"
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::baselines::AdaLipoConfig;
use crate::domain::SearchBox;
use crate::error::{Error, Result};
use crate::gradopt::{GradOptConfig, InitPoint, DEFAULT_EPOCHS};
use crate::objective::{FnObjective, Objective};
use crate::objectives::dataset::{DatasetManifest, FoldSplit};
use crate::objectives::krr::{KrrCv, KrrObjective};
use crate::objectives::surrogate::{WeightedQuadraticSurrogate, DEFAULT_SHARPNESS};
use crate::objectives::synthetic::SyntheticFunction;

fn default_budget() -> usize {
    1000
}
fn default_repetitions() -> usize {
    100
}
fn default_targets() -> Vec<f64> {
    vec![0.90, 0.95, 0.99]
}
fn default_offset() -> f64 {
    1.0
}
fn default_epochs() -> usize {
    DEFAULT_EPOCHS
}
fn default_exploration() -> f64 {
    0.1
}
fn default_grid_base() -> f64 {
    1.01
}
fn default_sharpness() -> f64 {
    DEFAULT_SHARPNESS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_targets")]
    pub targets: Vec<f64>,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads for independent runs; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    pub problems: Vec<ProblemConfig>,
    pub algorithms: Vec<AlgorithmConfig>,
}

/// A scalar bound applied to every coordinate, or one per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Scalar(f64),
    PerCoordinate(Vec<f64>),
}

impl Bound {
    fn expand(&self, dim: usize) -> Result<Vec<f64>> {
        match self {
            Bound::Scalar(v) => Ok(vec![*v; dim]),
            Bound::PerCoordinate(v) if v.len() == dim => Ok(v.clone()),
            Bound::PerCoordinate(v) => Err(Error::Config(format!(
                "bound has {} entries for dimension {dim}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Score `offset − f(x)` for a synthetic loss `f`.
    Synthetic {
        name: String,
        function: String,
        dimension: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Bound>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<Bound>,
        #[serde(default = "default_offset")]
        offset: f64,
    },
    /// Ten-fold cross-validated kernel ridge regression on a dataset.
    Krr {
        name: String,
        manifest: PathBuf,
        #[serde(default)]
        weighted: bool,
    },
    /// Separable quadratic on the weighted-KRR domain.
    Surrogate {
        name: String,
        weights: usize,
        #[serde(default = "default_sharpness")]
        sharpness: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl ProblemConfig {
    pub fn name(&self) -> &str {
        match self {
            ProblemConfig::Synthetic { name, .. }
            | ProblemConfig::Krr { name, .. }
            | ProblemConfig::Surrogate { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitPolicy {
    #[default]
    Uniform,
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmConfig {
    Gradopt {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default = "default_epochs")]
        epochs: usize,
        #[serde(default)]
        init: InitPolicy,
        #[serde(default)]
        reset_per_epoch: bool,
    },
    Prs {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
    },
    Adalipo {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(default = "default_exploration")]
        exploration_prob: f64,
        #[serde(default = "default_grid_base")]
        grid_base: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rejection_cap: Option<usize>,
    },
}

impl AlgorithmConfig {
    pub const KINDS: [&'static str; 3] = ["gradopt", "prs", "adalipo"];

    pub fn gradopt() -> Self {
        AlgorithmConfig::Gradopt { name: None, epochs: DEFAULT_EPOCHS, init: InitPolicy::Uniform, reset_per_epoch: false }
    }

    pub fn prs() -> Self {
        AlgorithmConfig::Prs { name: None }
    }

    pub fn adalipo() -> Self {
        AlgorithmConfig::Adalipo {
            name: None,
            exploration_prob: default_exploration(),
            grid_base: default_grid_base(),
            rejection_cap: None,
        }
    }

    /// Display name: the configured one, else a label for the kind.
    pub fn name(&self) -> String {
        let (given, default) = match self {
            AlgorithmConfig::Gradopt { name, .. } => (name, "GradOpt"),
            AlgorithmConfig::Prs { name } => (name, "PRS"),
            AlgorithmConfig::Adalipo { name, .. } => (name, "AdaLipo"),
        };
        given.clone().unwrap_or_else(|| default.to_string())
    }

    pub(crate) fn gradopt_config(&self, budget: usize, seed: u64) -> Option<GradOptConfig> {
        match self {
            AlgorithmConfig::Gradopt { epochs, init, reset_per_epoch, .. } => Some(
                GradOptConfig::new(budget, seed)
                    .epochs(*epochs)
                    .init(match init {
                        InitPolicy::Uniform => InitPoint::Uniform,
                        InitPolicy::Center => InitPoint::Center,
                    })
                    .reset_per_epoch(*reset_per_epoch),
            ),
            _ => None,
        }
    }

    pub(crate) fn adalipo_config(&self, seed: u64) -> Option<AdaLipoConfig> {
        match self {
            AlgorithmConfig::Adalipo { exploration_prob, grid_base, rejection_cap, .. } => Some(AdaLipoConfig {
                exploration_prob: *exploration_prob,
                grid_base: *grid_base,
                rejection_cap: *rejection_cap,
                seed,
            }),
            _ => None,
        }
    }
}

/// A problem ready to run: a score to maximize over a box.
#[derive(Clone)]
pub struct ResolvedProblem {
    pub name: String,
    pub score: Arc<dyn Objective>,
    pub description: String,
}

impl ResolvedProblem {
    pub fn domain(&self) -> &SearchBox {
        self.score.domain()
    }
}

impl std::fmt::Debug for ResolvedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResolvedProblem")
            .field("name", &self.name)
            .field("dimension", &self.score.dimension())
            .field("description", &self.description)
            .finish()
    }
}

impl ExperimentConfig {
    pub fn new(problems: Vec<ProblemConfig>, algorithms: Vec<AlgorithmConfig>) -> Self {
        Self {
            budget: default_budget(),
            repetitions: default_repetitions(),
            targets: default_targets(),
            master_seed: 0,
            workers: 0,
            problems,
            algorithms,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative dataset manifests are resolved against
    /// the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let dir = path.parent().unwrap_or(Path::new(""));
        for p in &mut cfg.problems {
            if let ProblemConfig::Krr { manifest, .. } = p {
                if manifest.is_relative() {
                    *manifest = dir.join(&*manifest);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    /// Checks everything that does not need dataset files.
    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::Config("budget must be positive".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.targets.is_empty() {
            return Err(Error::Config("no targets".into()));
        }
        if let Some(t) = self.targets.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(Error::Config(format!("target {t} outside (0, 1]")));
        }
        if self.problems.is_empty() || self.algorithms.is_empty() {
            return Err(Error::Config("need at least one problem and one algorithm".into()));
        }
        let mut seen = HashSet::new();
        for p in &self.problems {
            if !seen.insert(p.name().to_string()) {
                return Err(Error::Config(format!("duplicate problem name {:?}", p.name())));
            }
            if let ProblemConfig::Synthetic { function, dimension, .. } = p {
                SyntheticFunction::from_name(function).map_err(|e| Error::Config(e.to_string()))?;
                if *dimension == 0 {
                    return Err(Error::Config(format!("problem {:?}: dimension must be positive", p.name())));
                }
            }
        }
        let mut seen = HashSet::new();
        for a in &self.algorithms {
            if !seen.insert(a.name()) {
                return Err(Error::Config(format!("duplicate algorithm name {:?}", a.name())));
            }
            if let Some(g) = a.gradopt_config(self.budget, 0) {
                g.validate().map_err(|e| Error::Config(format!("{}: {e}", a.name())))?;
            }
            if let AlgorithmConfig::Adalipo { exploration_prob, grid_base, rejection_cap, .. } = a {
                if !(*exploration_prob > 0.0 && *exploration_prob <= 1.0) || !(*grid_base > 1.0) || *rejection_cap == Some(0) {
                    return Err(Error::Config(format!("{}: invalid AdaLipo settings", a.name())));
                }
            }
        }
        Ok(())
    }

    /// Builds every problem, loading datasets. Fails before any run starts.
    pub fn resolve_problems(&self) -> Result<Vec<ResolvedProblem>> {
        self.validate()?;
        self.problems.iter().map(resolve_problem).collect()
    }
}

fn resolve_problem(p: &ProblemConfig) -> Result<ResolvedProblem> {
    let cfg_err = |e: Error| Error::Config(format!("problem {:?}: {e}", p.name()));
    match p {
        ProblemConfig::Synthetic { name, function, dimension, lower, upper, offset } => {
            let func = SyntheticFunction::from_name(function).map_err(cfg_err)?;
            let default = func.default_domain(*dimension).map_err(cfg_err)?;
            let lo = match lower {
                Some(b) => b.expand(*dimension)?,
                None => default.lower().to_vec(),
            };
            let hi = match upper {
                Some(b) => b.expand(*dimension)?,
                None => default.upper().to_vec(),
            };
            let domain = SearchBox::new(lo, hi).map_err(cfg_err)?;
            let offset = *offset;
            let description = format!("{offset} - {function}(x), d = {dimension}");
            let score = FnObjective::new(domain, move |x: &[f64]| offset - func.eval(x));
            Ok(ResolvedProblem { name: name.clone(), score: Arc::new(score), description })
        }
        ProblemConfig::Krr { name, manifest, weighted } => {
            let m = DatasetManifest::read(manifest).map_err(cfg_err)?;
            let (ds, report) = m.load().map_err(cfg_err)?;
            let folds = FoldSplit::ten_fold(ds.len(), m.seed).map_err(cfg_err)?;
            let description = format!(
                "10-fold KRR{} on {} ({} rows, {} features, {} dropped)",
                if *weighted { " with sample weights" } else { "" },
                ds.name,
                report.rows_kept,
                ds.num_features(),
                report.rows_dropped
            );
            let cv = KrrCv::new(Arc::new(ds), folds).map_err(cfg_err)?;
            let score = KrrObjective::new(Arc::new(cv), *weighted);
            Ok(ResolvedProblem { name: name.clone(), score: Arc::new(score), description })
        }
        ProblemConfig::Surrogate { name, weights, sharpness, seed } => {
            let score = WeightedQuadraticSurrogate::new(*weights, *sharpness, *seed);
            let description = format!("weighted quadratic surrogate, d = {}", weights + 2);
            Ok(ResolvedProblem { name: name.clone(), score: Arc::new(score), description })
        }
    }
}
