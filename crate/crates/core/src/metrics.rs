//! Amari distance and benchmark statistics.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::convergence::Algorithm;
use crate::error::{IcaError, Result};
use crate::preprocess::WhiteningModel;

/// Amari distance of the global matrix `R = W·A` from a scaled permutation.
///
/// Lies in `[0, n − 1]` and is zero exactly when `R` is a scaled permutation.
pub fn amari_distance(unmixing: &DMatrix<f64>, mixing: &DMatrix<f64>) -> Result<f64> {
    let n = unmixing.nrows();
    if !unmixing.is_square() || mixing.shape() != (n, n) {
        return Err(IcaError::InvalidInput(format!(
            "amari distance needs square matrices of equal size, got {:?} and {:?}",
            unmixing.shape(),
            mixing.shape()
        )));
    }
    amari_index(&(unmixing * mixing))
}

/// Amari distance of an already formed global matrix `R`.
pub fn amari_index(global: &DMatrix<f64>) -> Result<f64> {
    if !global.is_square() || global.nrows() == 0 {
        return Err(IcaError::InvalidInput("amari distance needs a nonempty square matrix".into()));
    }
    if global.iter().any(|v| !v.is_finite()) {
        return Err(IcaError::UndefinedMetric("global matrix has non-finite entries".into()));
    }
    let n = global.nrows();
    let abs = global.abs();

    // Sums run over sorted terms so the value is bit-identical under any
    // permutation of rows or columns.
    let mut row_terms = Vec::with_capacity(n);
    for (i, row) in abs.row_iter().enumerate() {
        let line: Vec<f64> = row.iter().copied().collect();
        row_terms.push(ratio_term(line).ok_or_else(|| IcaError::UndefinedMetric(format!("row {i} of W·A is zero")))?);
    }
    let mut col_terms = Vec::with_capacity(n);
    for (j, col) in abs.column_iter().enumerate() {
        let line: Vec<f64> = col.iter().copied().collect();
        col_terms.push(ratio_term(line).ok_or_else(|| IcaError::UndefinedMetric(format!("column {j} of W·A is zero")))?);
    }
    let row_term = sorted_sum(row_terms);
    let col_term = sorted_sum(col_terms);
    Ok((row_term + col_term) / (2 * n) as f64)
}

/// `Σ|x| / max|x| − 1` for one row or column, `None` if it is all zero.
fn ratio_term(line: Vec<f64>) -> Option<f64> {
    let max = line.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    Some(sorted_sum(line) / max - 1.0)
}

fn sorted_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

/// Channel-space unmixing `W_ica · whitener`. Requires that whitening kept every
/// channel, since the Amari distance is only defined for square products.
pub fn composed_unmixing(unmixing: &DMatrix<f64>, whitening: &WhiteningModel) -> Result<DMatrix<f64>> {
    if whitening.retained() < whitening.channels() {
        return Err(IcaError::ReducedRank {
            retained: whitening.retained(),
            channels: whitening.channels(),
        });
    }
    whitening.compose(unmixing)
}

/// Outcome of one algorithm on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: u64,
    pub algorithm: Algorithm,
    pub iterations_used: usize,
    pub converged: bool,
    /// `null` when the run failed before completing an iteration.
    pub final_weight_change: Option<f64>,
    pub amari_distance: Option<f64>,
    /// ICA iterations only; excludes data generation, whitening, and I/O.
    pub wall_time_ms: f64,
    pub learning_rate: Option<f64>,
    pub failure: Option<String>,
}

/// Order statistics by the nearest-rank method (no interpolation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub p10: f64,
    pub median: f64,
    pub p90: f64,
    pub max: f64,
}

/// Nearest-rank percentile of sorted data: the value at 1-based rank
/// `⌈p/100 · N⌉`, clamped to `[1, N]`.
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

impl Summary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Summary> {
        let mut v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        Some(Summary {
            count: v.len(),
            min: v[0],
            p10: nearest_rank(&v, 10.0),
            median: nearest_rank(&v, 50.0),
            p90: nearest_rank(&v, 90.0),
            max: v[v.len() - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmAggregate {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub converged: usize,
    pub failed: usize,
    pub iterations: Summary,
    pub final_weight_change: Option<Summary>,
    pub amari_distance: Option<Summary>,
    /// Amari distance over converged runs only.
    pub amari_distance_converged: Option<Summary>,
    pub wall_time_ms: Summary,
}

impl AlgorithmAggregate {
    pub fn converged_fraction(&self) -> f64 {
        self.converged as f64 / self.runs as f64
    }
}

/// Per-algorithm statistics, in order of each algorithm's first appearance.
pub fn aggregate(records: &[RunRecord]) -> Result<Vec<AlgorithmAggregate>> {
    if records.is_empty() {
        return Err(IcaError::InvalidInput("cannot aggregate zero run records".into()));
    }
    let mut order: Vec<Algorithm> = Vec::new();
    for r in records {
        if !order.contains(&r.algorithm) {
            order.push(r.algorithm);
        }
    }
    Ok(order
        .into_iter()
        .map(|algorithm| {
            let runs: Vec<&RunRecord> = records.iter().filter(|r| r.algorithm == algorithm).collect();
            AlgorithmAggregate {
                algorithm,
                runs: runs.len(),
                converged: runs.iter().filter(|r| r.converged).count(),
                failed: runs.iter().filter(|r| r.failure.is_some()).count(),
                iterations: Summary::of(runs.iter().map(|r| r.iterations_used as f64))
                    .expect("at least one run"),
                final_weight_change: Summary::of(runs.iter().filter_map(|r| r.final_weight_change)),
                amari_distance: Summary::of(runs.iter().filter_map(|r| r.amari_distance)),
                amari_distance_converged: Summary::of(
                    runs.iter().filter(|r| r.converged).filter_map(|r| r.amari_distance),
                ),
                wall_time_ms: Summary::of(runs.iter().map(|r| r.wall_time_ms)).expect("at least one run"),
            }
        })
        .collect())
}
