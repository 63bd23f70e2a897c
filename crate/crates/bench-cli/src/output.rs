//! Result records and CSV emission.
//!
//! One row per optimization run, plus a sibling `-summary.csv` with per-cell
//! means and sample standard deviations (and `-trace.csv` for the
//! dimensionality experiment). Rows are sorted before writing so file
//! content never depends on execution order.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::Result;

/// One optimization run. `tx_indices`/`rx_indices` are ';'-delimited index
/// lists in a single CSV field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub m_tilde: usize,
    pub n_tilde: usize,
    pub g: usize,
    pub p: Option<f64>,
    pub seed: u64,
    pub coherence: f64,
    pub runtime_ms: f64,
    pub outer_iterations: usize,
    pub tx_indices: String,
    pub rx_indices: String,
}

impl ResultRecord {
    /// Canonical row order: experiment, algorithm, size, p, seed.
    fn sort_key(&self) -> impl Ord + '_ {
        (
            self.experiment.clone(),
            self.algorithm.clone(),
            self.m,
            self.n,
            self.p.map(f64::to_bits),
            self.seed,
        )
    }

    pub fn parse_indices(field: &str) -> Vec<usize> {
        if field.is_empty() {
            return Vec::new();
        }
        field
            .split(';')
            .map(|s| s.parse().expect("malformed index list"))
            .collect()
    }
}

pub fn join_indices(indices: &[usize]) -> String {
    indices
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

/// Per-cell aggregate over all runs sharing (experiment, algorithm, M, N, p).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub experiment: String,
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub p: Option<f64>,
    pub runs: usize,
    pub mean_coherence: f64,
    pub std_coherence: f64,
    pub mean_runtime_ms: f64,
}

/// Averaged per-iteration grid dimensionality for the trace experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub mean_tx_active: f64,
    pub mean_rx_active: f64,
    pub runs: usize,
}

pub fn sort_records(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Collapse sorted records into per-cell summaries (sample standard
/// deviation; zero for a single run).
pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRecord> {
    let mut out: Vec<SummaryRecord> = Vec::new();
    let mut cell: Vec<&ResultRecord> = Vec::new();
    let same_cell = |a: &ResultRecord, b: &ResultRecord| {
        a.experiment == b.experiment
            && a.algorithm == b.algorithm
            && a.m == b.m
            && a.n == b.n
            && a.p.map(f64::to_bits) == b.p.map(f64::to_bits)
    };
    for record in records {
        if let Some(first) = cell.first() {
            if !same_cell(first, record) {
                out.push(reduce(&cell));
                cell.clear();
            }
        }
        cell.push(record);
    }
    if !cell.is_empty() {
        out.push(reduce(&cell));
    }
    out
}

fn reduce(cell: &[&ResultRecord]) -> SummaryRecord {
    let n = cell.len();
    let mean = |f: fn(&ResultRecord) -> f64| cell.iter().map(|r| f(r)).sum::<f64>() / n as f64;
    let mean_coherence = mean(|r| r.coherence);
    let variance = if n > 1 {
        cell.iter()
            .map(|r| (r.coherence - mean_coherence).powi(2))
            .sum::<f64>()
            / (n - 1) as f64
    } else {
        0.0
    };
    let first = cell[0];
    SummaryRecord {
        experiment: first.experiment.clone(),
        algorithm: first.algorithm.clone(),
        m: first.m,
        n: first.n,
        p: first.p,
        runs: n,
        mean_coherence,
        std_coherence: variance.sqrt(),
        mean_runtime_ms: mean(|r| r.runtime_ms),
    }
}

/// `results.csv` → `results-summary.csv` (same directory).
pub fn sibling_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    out.with_file_name(format!("{stem}{suffix}.csv"))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::NonNumeric)
        .from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Write the per-run file and its `-summary.csv` sibling. Records are
/// sorted in place first.
pub fn write_results(out: &Path, records: &mut Vec<ResultRecord>) -> Result<()> {
    sort_records(records);
    write_csv(out, records)?;
    write_csv(&sibling_path(out, "-summary"), &summarize(records))?;
    Ok(())
}

pub fn write_trace(out: &Path, rows: &[TraceRecord]) -> Result<()> {
    write_csv(&sibling_path(out, "-trace"), rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in reader.deserialize() {
        out.push(row?);
    }
    Ok(out)
}
