//! Regression datasets from CSV files.
//!
//! Ingestion rules:
//! - comma separated; the first row is a header when any of its cells is
//!   neither a number nor a missing marker;
//! - `?` and empty cells are missing, and rows with a missing or non-numeric
//!   cell in a used column are dropped;
//! - at most `max_rows` rows are kept (a seeded random subset, file order
//!   preserved);
//! - features and targets are z-scored with the sample (n − 1) variance, and
//!   constant feature columns are dropped.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Smallest dataset accepted: ten folds of at least two samples.
pub const MIN_ROWS: usize = 20;

/// Default row cap applied at load time.
pub const DEFAULT_MAX_ROWS: usize = 200;

pub const NUM_FOLDS: usize = 10;

/// Standardized regression data.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    /// n × p, one row per sample.
    pub features: DMatrix<f64>,
    pub targets: Vec<f64>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, features: DMatrix<f64>, targets: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if features.nrows() != targets.len() {
            return Err(Error::Ingestion(format!(
                "{name}: {} feature rows but {} targets",
                features.nrows(),
                targets.len()
            )));
        }
        if targets.len() < MIN_ROWS {
            return Err(Error::Ingestion(format!(
                "{name}: {} rows, need at least {MIN_ROWS} for {NUM_FOLDS}-fold cross-validation",
                targets.len()
            )));
        }
        if features.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::Ingestion(format!("{name}: non-finite entries")));
        }
        Ok(Self { name, features, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }
}

/// A column named by zero-based index or header name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

/// Which columns to use and how many rows to keep.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSpec {
    pub target: ColumnRef,
    /// Columns excluded from the features (e.g. identifiers).
    pub drop: Vec<ColumnRef>,
    /// `None` keeps every row.
    pub max_rows: Option<usize>,
    /// Seed of the row subsample.
    pub seed: u64,
}

impl ColumnSpec {
    pub fn target(target: ColumnRef) -> Self {
        Self { target, drop: Vec::new(), max_rows: Some(DEFAULT_MAX_ROWS), seed: 0 }
    }
}

/// Row accounting from an ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub rows_kept: usize,
    pub constant_columns_dropped: usize,
}

fn parse_cell(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    if cell.is_empty() || cell == "?" {
        return None;
    }
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_missing_marker(cell: &str) -> bool {
    let cell = cell.trim();
    cell.is_empty() || cell == "?"
}

fn resolve(col: &ColumnRef, header: Option<&[String]>, width: usize) -> Result<usize> {
    let idx = match col {
        ColumnRef::Index(i) => *i,
        ColumnRef::Name(name) => header
            .ok_or_else(|| Error::Ingestion(format!("column {name:?} named but file has no header")))?
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Ingestion(format!("no column named {name:?}")))?,
    };
    if idx >= width {
        return Err(Error::Ingestion(format!("column index {idx} out of range (width {width})")));
    }
    Ok(idx)
}

/// Column means and sample standard deviations of a row-major table.
fn column_stats(rows: &[Vec<f64>], col: usize) -> (f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[col]).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r[col] - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Z-scores every column in place with the sample standard deviation and
/// returns the indices of constant columns, which are left untouched.
pub fn standardize_columns(rows: &mut [Vec<f64>]) -> Vec<usize> {
    let Some(width) = rows.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut constant = Vec::new();
    for col in 0..width {
        let (mean, sd) = column_stats(rows, col);
        if !(sd > 0.0) || !sd.is_finite() {
            constant.push(col);
            continue;
        }
        rows.iter_mut().for_each(|r| r[col] = (r[col] - mean) / sd);
    }
    constant
}

/// Reads and standardizes a regression CSV.
pub fn load_dataset(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<(Dataset, LoadReport)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Ingestion(format!("cannot read {}: {e}", path.display())))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_dataset(&name, &text, spec)
}

/// Parses CSV text; see [`load_dataset`].
pub fn parse_dataset(name: &str, text: &str, spec: &ColumnSpec) -> Result<(Dataset, LoadReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records: Vec<Vec<String>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Ingestion(format!("{name}: malformed CSV: {e}")))?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        records.push(rec.iter().map(str::to_owned).collect());
    }
    if records.is_empty() {
        return Err(Error::Ingestion(format!("{name}: file is empty")));
    }

    let header = if records[0].iter().any(|c| !is_missing_marker(c) && parse_cell(c).is_none()) {
        Some(records.remove(0))
    } else {
        None
    };
    let width = header.as_ref().map(Vec::len).unwrap_or_else(|| records.iter().map(Vec::len).max().unwrap_or(0));
    let target = resolve(&spec.target, header.as_deref(), width)?;
    let dropped: Vec<usize> = spec
        .drop
        .iter()
        .map(|c| resolve(c, header.as_deref(), width))
        .collect::<Result<_>>()?;
    let feature_cols: Vec<usize> = (0..width).filter(|c| *c != target && !dropped.contains(c)).collect();
    if feature_cols.is_empty() {
        return Err(Error::Ingestion(format!("{name}: no feature columns left")));
    }

    let rows_read = records.len();
    // Each kept row: features first, target last.
    let mut rows: Vec<Vec<f64>> = records
        .iter()
        .filter(|r| r.len() == width)
        .filter_map(|r| {
            feature_cols
                .iter()
                .chain(Some(&target))
                .map(|&c| parse_cell(&r[c]))
                .collect::<Option<Vec<f64>>>()
        })
        .collect();
    let rows_dropped = rows_read - rows.len();
    if rows.is_empty() {
        return Err(Error::Ingestion(format!("{name}: no complete numeric rows")));
    }

    if let Some(cap) = spec.max_rows {
        if rows.len() > cap {
            let mut idx: Vec<usize> = (0..rows.len()).collect();
            idx.shuffle(&mut seeded(spec.seed, 0));
            idx.truncate(cap);
            idx.sort_unstable();
            rows = idx.into_iter().map(|i| std::mem::take(&mut rows[i])).collect();
        }
    }
    if rows.len() < MIN_ROWS {
        return Err(Error::Ingestion(format!(
            "{name}: {} usable rows after dropping {rows_dropped}, need at least {MIN_ROWS}",
            rows.len()
        )));
    }

    let constant = standardize_columns(&mut rows);
    let target_col = feature_cols.len();
    if constant.contains(&target_col) {
        return Err(Error::Ingestion(format!("{name}: target column is constant")));
    }
    let kept: Vec<usize> = (0..target_col).filter(|c| !constant.contains(c)).collect();
    if kept.is_empty() {
        return Err(Error::Ingestion(format!("{name}: every feature column is constant")));
    }
    let features = DMatrix::from_fn(rows.len(), kept.len(), |i, j| rows[i][kept[j]]);
    let targets = rows.iter().map(|r| r[target_col]).collect();
    let report = LoadReport {
        rows_read,
        rows_dropped,
        rows_kept: rows.len(),
        constant_columns_dropped: target_col - kept.len(),
    };
    log::info!(
        "{name}: read {rows_read} rows, dropped {rows_dropped}, kept {} with {} features",
        report.rows_kept,
        kept.len()
    );
    Ok((Dataset::new(name, features, targets)?, report))
}

/// Key-value file describing how to load one dataset reproducibly.
///
/// ```toml
/// name = "housing"
/// path = "housing.csv"   # relative to the manifest
/// target = 13            # index or header name
/// drop = []
/// max_rows = 200
/// seed = 0               # row subsample and fold assignment
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    #[serde(default)]
    pub name: Option<String>,
    pub path: PathBuf,
    pub target: ColumnRef,
    #[serde(default)]
    pub drop: Vec<ColumnRef>,
    #[serde(default = "default_max_rows")]
    pub max_rows: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_max_rows() -> usize {
    DEFAULT_MAX_ROWS
}

impl DatasetManifest {
    /// Reads a manifest; a relative `path` is resolved against the
    /// manifest's directory.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read manifest {}: {e}", path.display())))?;
        let mut m: DatasetManifest = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("bad manifest {}: {e}", path.display())))?;
        if m.path.is_relative() {
            if let Some(dir) = path.parent() {
                m.path = dir.join(&m.path);
            }
        }
        Ok(m)
    }

    pub fn column_spec(&self) -> ColumnSpec {
        ColumnSpec {
            target: self.target.clone(),
            drop: self.drop.clone(),
            max_rows: Some(self.max_rows),
            seed: self.seed,
        }
    }

    pub fn load(&self) -> Result<(Dataset, LoadReport)> {
        let (mut ds, report) = load_dataset(&self.path, &self.column_spec())?;
        if let Some(name) = &self.name {
            ds.name = name.clone();
        }
        Ok((ds, report))
    }
}

/// Assignment of samples to cross-validation folds (zero-based fold ids).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub assignments: Vec<usize>,
    pub num_folds: usize,
}

impl FoldSplit {
    /// Shuffles `0..n` with `seed` and cuts the permutation into `num_folds`
    /// contiguous blocks whose sizes differ by at most one.
    pub fn random(n: usize, num_folds: usize, seed: u64) -> Result<Self> {
        if num_folds < 2 || n < 2 * num_folds {
            return Err(Error::invalid(format!(
                "cannot split {n} samples into {num_folds} folds of at least two"
            )));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut seeded(seed, 1));
        let base = n / num_folds;
        let extra = n % num_folds;
        let mut assignments = vec![0; n];
        let mut pos = 0;
        for fold in 0..num_folds {
            let size = base + usize::from(fold < extra);
            for &i in &perm[pos..pos + size] {
                assignments[i] = fold;
            }
            pos += size;
        }
        Ok(Self { assignments, num_folds })
    }

    pub fn ten_fold(n: usize, seed: u64) -> Result<Self> {
        Self::random(n, NUM_FOLDS, seed)
    }

    pub fn fold_indices(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        (0..self.assignments.len()).partition(|&i| self.assignments[i] != fold)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_folds];
        self.assignments.iter().for_each(|&f| sizes[f] += 1);
        sizes
    }
}
