use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};

/// Evals-to-target statistics of one `(problem, algorithm, target)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub mean: f64,
    /// Population standard deviation over the included runs.
    pub std: f64,
    /// Included runs that never reached the target (counted as the budget).
    pub censored: usize,
    /// Runs included in the mean.
    pub runs: usize,
    /// Runs excluded because they failed.
    pub failed: usize,
}

impl CellStats {
    pub fn from_evals(evals: &[usize], budget: usize, failed: usize) -> Self {
        let n = evals.len() as f64;
        let mean = evals.iter().map(|&e| e as f64).sum::<f64>() / n;
        let var = evals.iter().map(|&e| (e as f64 - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
            censored: evals.iter().filter(|&&e| e >= budget).count(),
            runs: evals.len(),
            failed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Stats(CellStats),
    /// The metric is undefined for this cell; the reason is kept for logs.
    NotAvailable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub problem: String,
    pub algorithm: String,
    pub target: f64,
    pub value: CellValue,
}

/// Evals-to-target results laid out by problem, algorithm and target.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub budget: usize,
    pub problems: Vec<String>,
    pub algorithms: Vec<String>,
    pub targets: Vec<f64>,
    pub reference_best: BTreeMap<String, f64>,
    cells: Vec<Cell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Markdown,
    Csv,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Markdown => "md",
            OutputFormat::Csv => "csv",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::invalid(format!("unknown output format {other:?}"))),
        }
    }
}

impl ResultsTable {
    pub fn new(budget: usize, problems: Vec<String>, algorithms: Vec<String>, targets: Vec<f64>) -> Self {
        Self { budget, problems, algorithms, targets, reference_best: BTreeMap::new(), cells: Vec::new() }
    }

    pub fn empty(budget: usize) -> Self {
        Self::new(budget, Vec::new(), Vec::new(), Vec::new())
    }

    /// Inserts or replaces a cell, registering unseen labels in order.
    pub fn set(&mut self, problem: &str, algorithm: &str, target: f64, value: CellValue) {
        if !self.problems.iter().any(|p| p == problem) {
            self.problems.push(problem.to_string());
        }
        if !self.algorithms.iter().any(|a| a == algorithm) {
            self.algorithms.push(algorithm.to_string());
        }
        if !self.targets.contains(&target) {
            self.targets.push(target);
        }
        match self
            .cells
            .iter_mut()
            .find(|c| c.problem == problem && c.algorithm == algorithm && c.target == target)
        {
            Some(c) => c.value = value,
            None => self.cells.push(Cell {
                problem: problem.to_string(),
                algorithm: algorithm.to_string(),
                target,
                value,
            }),
        }
    }

    pub fn get(&self, problem: &str, algorithm: &str, target: f64) -> Option<&CellValue> {
        self.cells
            .iter()
            .find(|c| c.problem == problem && c.algorithm == algorithm && c.target == target)
            .map(|c| &c.value)
    }

    pub fn stats(&self, problem: &str, algorithm: &str, target: f64) -> Option<&CellStats> {
        match self.get(problem, algorithm, target)? {
            CellValue::Stats(s) => Some(s),
            CellValue::NotAvailable(_) => None,
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Adds every cell of `other` (e.g. results produced elsewhere for
    /// algorithms this crate does not implement).
    pub fn merge(&mut self, other: &ResultsTable) {
        for c in &other.cells {
            self.set(&c.problem, &c.algorithm, c.target, c.value.clone());
        }
        for (k, v) in &other.reference_best {
            self.reference_best.entry(k.clone()).or_insert(*v);
        }
    }

    /// Reads the long-form CSV written by [`emit_results`].
    pub fn from_csv(text: &str, budget: usize) -> Result<Self> {
        let mut table = Self::empty(budget);
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::invalid(e.to_string()))?.clone();
        if header.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::invalid(format!("unexpected CSV header {header:?}")));
        }
        for rec in reader.records() {
            let rec = rec.map_err(|e| Error::invalid(e.to_string()))?;
            let num = |i: usize| -> Result<f64> {
                rec[i].parse().map_err(|_| Error::invalid(format!("bad number {:?}", &rec[i])))
            };
            let target = num(2)?;
            let value = if &rec[3] == "NA" {
                CellValue::NotAvailable("imported".into())
            } else {
                CellValue::Stats(CellStats {
                    mean: num(3)?,
                    std: num(4)?,
                    censored: rec[5].parse().map_err(|_| Error::invalid("bad censored count"))?,
                    runs: 0,
                    failed: 0,
                })
            };
            table.set(&rec[0], &rec[1], target, value);
        }
        Ok(table)
    }
}

const CSV_HEADER: [&str; 6] = ["problem", "algorithm", "target", "mean", "std", "censored"];

/// Mean rounded to two decimals, always with a fractional part: `10.38`,
/// `8.1`, `1000.0`.
pub fn format_mean(mean: f64) -> String {
    let rounded = (mean * 100.0).round() / 100.0;
    let s = format!("{rounded}");
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}

/// `mean(± std)` with the standard deviation rounded to an integer.
pub fn format_cell(stats: &CellStats, bold: bool) -> String {
    let mean = format_mean(stats.mean);
    let std = format!("{:.0}", stats.std);
    if bold {
        format!("**{mean}**(± {std})")
    } else {
        format!("{mean}(± {std})")
    }
}

/// Parses a markdown cell written by [`format_cell`]: `(mean, std, bold)`.
pub fn parse_markdown_cell(cell: &str) -> Option<(f64, f64, bool)> {
    let cell = cell.trim();
    let (mean_part, rest) = cell.split_once("(± ")?;
    let std: f64 = rest.strip_suffix(')')?.trim().parse().ok()?;
    let (mean, bold) = match mean_part.strip_prefix("**").and_then(|m| m.strip_suffix("**")) {
        Some(m) => (m, true),
        None => (mean_part, false),
    };
    Some((mean.parse().ok()?, std, bold))
}

fn target_label(t: f64) -> String {
    format!("{}% Target", (t * 1e6).round() / 1e4)
}

fn emit_markdown(table: &ResultsTable) -> String {
    let mut out = String::new();
    if table.is_empty() {
        return out;
    }
    for &target in &table.targets {
        write!(out, "| {} |", target_label(target)).unwrap();
        for p in &table.problems {
            write!(out, " {p} |").unwrap();
        }
        out.push('\n');
        out.push_str("|---|");
        out.push_str(&"---|".repeat(table.problems.len()));
        out.push('\n');

        // smallest displayed mean per problem is bolded; ties all bolded
        let best: Vec<Option<String>> = table
            .problems
            .iter()
            .map(|p| {
                table
                    .algorithms
                    .iter()
                    .filter_map(|a| table.stats(p, a, target))
                    .map(|s| (s.mean * 100.0).round() / 100.0)
                    .fold(None, |acc: Option<f64>, m| Some(acc.map_or(m, |b| b.min(m))))
                    .map(format_mean)
            })
            .collect();

        for a in &table.algorithms {
            write!(out, "| {a} |").unwrap();
            for (p, best) in table.problems.iter().zip(&best) {
                let text = match table.get(p, a, target) {
                    Some(CellValue::Stats(s)) => {
                        let bold = best.as_deref() == Some(format_mean(s.mean).as_str());
                        format_cell(s, bold)
                    }
                    Some(CellValue::NotAvailable(_)) => "N/A".to_string(),
                    None => "".to_string(),
                };
                write!(out, " {text} |").unwrap();
            }
            out.push('\n');
        }
        out.push('\n');
    }
    writeln!(
        out,
        "Cells: mean(± standard deviation) of evaluations needed to reach target × best score; \
         runs that never reach it count as {}.",
        table.budget
    )
    .unwrap();
    out
}

fn emit_csv(table: &ResultsTable) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for p in &table.problems {
        for a in &table.algorithms {
            for &t in &table.targets {
                let Some(v) = table.get(p, a, t) else { continue };
                match v {
                    CellValue::Stats(s) => {
                        writeln!(out, "{},{},{},{},{},{}", csv_field(p), csv_field(a), t, s.mean, s.std, s.censored).unwrap()
                    }
                    CellValue::NotAvailable(_) => {
                        writeln!(out, "{},{},{},NA,NA,NA", csv_field(p), csv_field(a), t).unwrap()
                    }
                }
            }
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders a results table.
///
/// Markdown gives one block per target with algorithms as rows, problems as
/// columns and the best mean per column in bold. CSV is long form with
/// columns `problem, algorithm, target, mean, std, censored`.
pub fn emit_results(table: &ResultsTable, format: OutputFormat) -> String {
    match format {
        OutputFormat::Markdown => emit_markdown(table),
        OutputFormat::Csv => emit_csv(table),
    }
}
