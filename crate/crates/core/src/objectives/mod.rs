//! Benchmark objectives.
//!
//! Synthetic test functions are losses (lower is better). The kernel ridge
//! regression objectives and the high-dimensional surrogate are scores
//! (higher is better); wrap them in [`crate::Negated`] before handing them to
//! a minimizer.

pub mod dataset;
pub mod krr;
pub mod surrogate;
pub mod synthetic;

pub use dataset::{load_dataset, ColumnRef, ColumnSpec, Dataset, DatasetManifest, FoldSplit, LoadReport};
pub use krr::{krr_cv_score, solve_krr, solve_weighted_krr, CvScore, KrrCv, KrrHyperparams, KrrObjective};
pub use surrogate::WeightedQuadraticSurrogate;
pub use synthetic::{eval_synthetic, SyntheticFunction, SyntheticObjective};
