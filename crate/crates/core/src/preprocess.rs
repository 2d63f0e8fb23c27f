//! Centering and PCA whitening.
//!
//! Covariances are normalized by `t` (not `t - 1`) throughout the crate, so a
//! whitened matrix `Z` satisfies `Z Zᵀ / t = I`.

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{IcaError, Result};
use crate::matrix::{sample_covariance, DataMatrix};

/// Eigenvalues below `EIGEN_FLOOR * λ_max` are clamped before the inverse square root.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Subtract each row's mean. Returns the centered matrix and the removed means.
pub fn center(data: &DataMatrix) -> (DataMatrix, DVector<f64>) {
    let mean = row_means(data);
    let mut centered = data.values().clone();
    for (mut row, mu) in centered.row_iter_mut().zip(mean.iter()) {
        row.add_scalar_mut(-mu);
    }
    // Finite input minus a finite mean stays finite, and the shape is unchanged.
    (DataMatrix::new(centered).expect("centering preserves validity"), mean)
}

fn row_means(data: &DMatrix<f64>) -> DVector<f64> {
    let t = data.ncols() as f64;
    DVector::from_iterator(data.nrows(), data.row_iter().map(|r| r.sum() / t))
}

/// A fitted centering + PCA whitening transform.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningModel {
    /// Per-channel mean removed before projection.
    pub mean: DVector<f64>,
    /// `m × n`; rows are principal directions scaled by `λ^{-1/2}`.
    pub whitener: DMatrix<f64>,
    /// `n × m`; right inverse of `whitener`.
    pub dewhitener: DMatrix<f64>,
    /// All `n` covariance eigenvalues, nonincreasing, negatives clipped to zero.
    pub eigenvalues: DVector<f64>,
    pub variance_threshold: f64,
}

impl WhiteningModel {
    /// Number of channels the model was fitted on.
    pub fn channels(&self) -> usize {
        self.whitener.ncols()
    }

    /// Number of whitened components kept.
    pub fn retained(&self) -> usize {
        self.whitener.nrows()
    }

    /// Fraction of total variance carried by each eigenvalue.
    pub fn variance_fractions(&self) -> DVector<f64> {
        let total = self.eigenvalues.sum();
        self.eigenvalues.map(|l| l / total)
    }

    /// Express a whitened-space unmixing matrix in channel space: `W · whitener`.
    pub fn compose(&self, unmixing: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if unmixing.ncols() != self.retained() {
            return Err(IcaError::InvalidInput(format!(
                "unmixing has {} columns, whitening retains {} components",
                unmixing.ncols(),
                self.retained()
            )));
        }
        Ok(unmixing * &self.whitener)
    }

    /// Build a model directly from its parts. Used for identity or externally
    /// supplied transforms; `fit_whitening` is the normal constructor.
    pub fn from_parts(mean: DVector<f64>, whitener: DMatrix<f64>, dewhitener: DMatrix<f64>) -> Result<Self> {
        let (m, n) = whitener.shape();
        if mean.len() != n || dewhitener.shape() != (n, m) {
            return Err(IcaError::InvalidInput(format!(
                "inconsistent whitening shapes: mean {}, whitener {m}x{n}, dewhitener {}x{}",
                mean.len(),
                dewhitener.nrows(),
                dewhitener.ncols()
            )));
        }
        Ok(WhiteningModel {
            mean,
            whitener,
            dewhitener,
            eigenvalues: DVector::from_element(n, 1.0),
            variance_threshold: 0.0,
        })
    }
}

/// Fit a whitening model, keeping every principal component whose share of the
/// total variance is at least `variance_threshold` (at least one is always kept).
pub fn fit_whitening(data: &DataMatrix, variance_threshold: f64) -> Result<WhiteningModel> {
    if !(0.0..1.0).contains(&variance_threshold) {
        return Err(IcaError::InvalidParameter(format!(
            "variance threshold must lie in [0, 1), got {variance_threshold}"
        )));
    }
    let (n, t) = (data.n(), data.t());
    if t <= n {
        warn!("whitening {n} channels from only {t} samples; covariance is rank deficient");
    }

    let (centered, mean) = center(data);
    let cov = sample_covariance(&centered);
    let (eigenvalues, eigenvectors) = sorted_eigen(cov);

    let lambda_max = eigenvalues[0];
    let scale = data.values().amax().max(f64::MIN_POSITIVE);
    if lambda_max <= (64.0 * f64::EPSILON * scale).powi(2) {
        return Err(IcaError::DegenerateData(format!(
            "all covariance eigenvalues vanish (largest {lambda_max:e})"
        )));
    }

    let total: f64 = eigenvalues.sum();
    let retained = eigenvalues
        .iter()
        .take_while(|&&l| l / total >= variance_threshold)
        .count()
        .max(1);

    let floor = EIGEN_FLOOR * lambda_max;
    let mut whitener = DMatrix::zeros(retained, n);
    let mut dewhitener = DMatrix::zeros(n, retained);
    for k in 0..retained {
        let lambda = eigenvalues[k].max(floor);
        let direction = eigenvectors.column(k);
        whitener.row_mut(k).copy_from(&(direction.transpose() / lambda.sqrt()));
        dewhitener.column_mut(k).copy_from(&(direction * lambda.sqrt()));
    }

    Ok(WhiteningModel {
        mean,
        whitener,
        dewhitener,
        eigenvalues,
        variance_threshold,
    })
}

/// Eigen-decompose a symmetric matrix, sorting eigenpairs by decreasing
/// eigenvalue and fixing each eigenvector's sign so its largest-magnitude
/// entry is positive.
fn sorted_eigen(cov: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = cov.nrows();
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k].max(0.0)));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).clone_owned();
        let pivot = v.iamax();
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        vectors.column_mut(dst).copy_from(&v);
    }
    (values, vectors)
}

/// Apply a fitted model: `whitener · (data - mean)`.
pub fn apply_whitening(model: &WhiteningModel, data: &DataMatrix) -> Result<DataMatrix> {
    if data.n() != model.channels() {
        return Err(IcaError::InvalidInput(format!(
            "data has {} channels, whitening model expects {}",
            data.n(),
            model.channels()
        )));
    }
    let mut centered = data.values().clone();
    for (mut row, mu) in centered.row_iter_mut().zip(model.mean.iter()) {
        row.add_scalar_mut(-mu);
    }
    DataMatrix::new(&model.whitener * centered)
}
