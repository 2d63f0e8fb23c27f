//! The channel-by-sample data matrix and a few dense helpers shared across modules.

use std::ops::Deref;

use nalgebra::DMatrix;

use crate::error::{IcaError, Result};

/// An `n × t` real matrix: rows are channels (or components), columns are samples.
///
/// Construction guarantees `n >= 1`, `t >= 2` and that every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(DMatrix<f64>);

impl DataMatrix {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 1 {
            return Err(IcaError::InvalidInput("data matrix needs at least one row".into()));
        }
        if values.ncols() < 2 {
            return Err(IcaError::InvalidInput(format!(
                "data matrix needs at least two samples, got {}",
                values.ncols()
            )));
        }
        check_finite(&values)?;
        Ok(DataMatrix(values))
    }

    /// Build from row-major nested vectors, one inner vector per channel.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let t = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != t) {
            return Err(IcaError::InvalidInput(format!(
                "row {} has {} samples, expected {t}",
                i,
                rows[i].len()
            )));
        }
        Self::new(DMatrix::from_fn(n, t, |i, j| rows[i][j]))
    }

    /// Number of channels.
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    /// Number of samples.
    pub fn t(&self) -> usize {
        self.0.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        to_rows(&self.0)
    }
}

impl Deref for DataMatrix {
    type Target = DMatrix<f64>;

    fn deref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

impl AsRef<DMatrix<f64>> for DataMatrix {
    fn as_ref(&self) -> &DMatrix<f64> {
        &self.0
    }
}

pub(crate) fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    // Column-major scan; report the first offender in (row, column) terms.
    match m.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(IcaError::NonFinite {
            row: k % m.nrows(),
            column: k / m.nrows(),
        }),
        None => Ok(()),
    }
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Sample covariance `X Xᵀ / t` of an already centered matrix.
pub fn sample_covariance(centered: &DMatrix<f64>) -> DMatrix<f64> {
    let t = centered.ncols() as f64;
    let mut cov = centered * centered.transpose();
    cov /= t;
    cov
}

/// `max |M Mᵀ - I|` over all entries.
pub fn orthogonality_error(m: &DMatrix<f64>) -> f64 {
    max_abs_deviation_from_identity(&(m * m.transpose()))
}

pub fn max_abs_deviation_from_identity(m: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for ((i, j), v) in m
        .iter()
        .enumerate()
        .map(|(k, v)| ((k % m.nrows(), k / m.nrows()), v))
    {
        let target = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((v - target).abs());
    }
    worst
}
