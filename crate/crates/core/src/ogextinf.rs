//! Orthogonal extended infomax.
//!
//! Each iteration forms the higher-order covariance `R̂ = (1/t)·φ(S)·Sᵀ` of the
//! current sources, applies the multiplicative update `W̃ = R̂⁻¹·W`, and
//! projects back onto the orthogonal group with `W = W̃·(W̃ᵀW̃)^{-1/2}`. The
//! `1/t` factor is immaterial: the projection cancels any positive scale on `R̂`.

use std::time::Instant;

use log::warn;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::convergence::{Algorithm, ConvergenceRecord, IcaResult, IterationRecord};
use crate::error::{IcaError, Result};
use crate::matrix::{max_abs_deviation_from_identity, orthogonality_error, sample_covariance, DataMatrix};
use crate::nonlinearity::{signs_and_cov_sample_major, Sign, DEFAULT_SIGN_CUTOFF};

/// Largest singular-value ratio accepted for `R̂` before inversion.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Inputs whose covariance deviates from `I` by more than this are not white.
pub const WHITENESS_TOLERANCE: f64 = 1e-6;

const ORTHOGONAL_INPUT_TOLERANCE: f64 = 1e-8;

/// `max |MᵀM − I|` below which a matrix is treated as already orthogonal.
/// Householder QR of a 100 × 100 matrix lands around `10ε`.
const ORTHOGONAL_TO_WORKING_PRECISION: f64 = 1e-13;

const POLAR_MAX_ITERATIONS: usize = 100;
const POLAR_FINAL_STEP: f64 = 1e-8;
const POLAR_UNSCALED_BELOW: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct IterationConfig {
    pub max_iterations: usize,
    /// Stop once the Frobenius weight change is at or below this.
    pub tolerance: f64,
    pub sign_rule_sample_cutoff: usize,
    /// Starting point; identity when `None`. Must be orthogonal.
    pub initial_unmixing: Option<DMatrix<f64>>,
    /// Reject non-white input instead of logging a warning.
    pub strict_whiteness: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            max_iterations: 1000,
            tolerance: 1e-6,
            sign_rule_sample_cutoff: DEFAULT_SIGN_CUTOFF,
            initial_unmixing: None,
            strict_whiteness: false,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(IcaError::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(IcaError::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.sign_rule_sample_cutoff < 1 {
            return Err(IcaError::InvalidParameter("sign cutoff must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnmixingState {
    pub unmixing: DMatrix<f64>,
    pub signs: Vec<Sign>,
    pub iteration: usize,
    pub weight_change: f64,
}

impl UnmixingState {
    pub fn new(unmixing: DMatrix<f64>) -> Self {
        let m = unmixing.nrows();
        UnmixingState {
            unmixing,
            signs: vec![Sign::Super; m],
            iteration: 0,
            weight_change: f64::INFINITY,
        }
    }
}

fn condition_from_singular_values(sv: &nalgebra::DVector<f64>) -> f64 {
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Polar factor by Newton's iteration `X ← ½(ζX + (ζX)⁻ᵀ)` with Frobenius-norm
/// scaling `ζ`. Accurate to about `cond·ε`; iterative SVDs lose digits on
/// clustered singular values.
fn polar_factor(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut x = m.clone();
    let mut scaled = true;
    let mut finishing = false;
    for _ in 0..POLAR_MAX_ITERATIONS {
        let inv_t = x.clone().try_inverse()?.transpose();
        let zeta = if scaled { (inv_t.norm() / x.norm()).sqrt() } else { 1.0 };
        let next = (&x * zeta + inv_t / zeta) * 0.5;
        let delta = (&next - &x).norm() / next.norm();
        x = next;
        if !delta.is_finite() {
            return None;
        }
        if finishing {
            return Some(x);
        }
        // Convergence is quadratic: once the step is this small, one more
        // step reaches working precision.
        if delta <= POLAR_FINAL_STEP {
            finishing = true;
        }
        scaled = delta > POLAR_UNSCALED_BELOW;
    }
    Some(x)
}

/// Nearest orthogonal matrix in Frobenius norm, `M·(MᵀM)^{-1/2} = U·Vᵀ`.
pub fn symmetric_orthogonalize(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(IcaError::InvalidInput(format!(
            "orthogonalization needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(IcaError::SingularUpdate {
            condition: f64::NAN,
            iteration: None,
        });
    }
    // The polar factor of an orthogonal matrix is the matrix itself; returning
    // it untouched keeps exact fixed points exact.
    if orthogonality_error(&m.transpose()) <= ORTHOGONAL_TO_WORKING_PRECISION {
        return Ok(m.clone());
    }
    let condition = condition_from_singular_values(&m.singular_values());
    if !(condition < CONDITION_LIMIT) {
        return Err(IcaError::SingularUpdate {
            condition,
            iteration: None,
        });
    }
    polar_factor(m).ok_or(IcaError::SingularUpdate {
        condition,
        iteration: None,
    })
}

/// `W̃ = R̂⁻¹·W` by a pivoted LU solve, followed by symmetric orthogonalization.
pub fn multiplicative_update(r_hat: &DMatrix<f64>, unmixing: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if r_hat.iter().any(|v| !v.is_finite()) {
        return Err(IcaError::SingularUpdate {
            condition: f64::NAN,
            iteration: None,
        });
    }
    let condition = condition_from_singular_values(&r_hat.singular_values());
    if !(condition <= CONDITION_LIMIT) {
        return Err(IcaError::SingularUpdate {
            condition,
            iteration: None,
        });
    }
    let w_tilde = r_hat.clone().lu().solve(unmixing).ok_or(IcaError::SingularUpdate {
        condition,
        iteration: None,
    })?;
    symmetric_orthogonalize(&w_tilde)
}

/// Frobenius norm of `next - prev`.
pub fn weight_change(prev: &DMatrix<f64>, next: &DMatrix<f64>) -> Result<f64> {
    if prev.shape() != next.shape() {
        return Err(IcaError::InvalidInput(format!(
            "weight change between {:?} and {:?} matrices",
            prev.shape(),
            next.shape()
        )));
    }
    Ok((next - prev).norm())
}

/// Buffers for iterating on one data matrix in sample-major layout.
pub(crate) struct Workspace {
    /// Whitened data transposed, `t × m`.
    data_t: DMatrix<f64>,
    sources_t: DMatrix<f64>,
    phi: DMatrix<f64>,
}

impl Workspace {
    pub(crate) fn new(whitened: &DMatrix<f64>) -> Self {
        let (m, t) = whitened.shape();
        Workspace {
            data_t: whitened.transpose(),
            sources_t: DMatrix::zeros(t, m),
            phi: DMatrix::zeros(t, m),
        }
    }

    pub(crate) fn components(&self) -> usize {
        self.data_t.ncols()
    }

    /// Signs and `R̂` for the sources `unmixing · whitened`.
    pub(crate) fn signs_and_cov(&mut self, unmixing: &DMatrix<f64>, cutoff: usize) -> Result<(Vec<Sign>, DMatrix<f64>)> {
        // Sᵀ = Xᵀ·Wᵀ
        self.sources_t.gemm(1.0, &self.data_t, &unmixing.transpose(), 0.0);
        signs_and_cov_sample_major(&self.sources_t, cutoff, &mut self.phi)
    }
}

fn step_in(state: &UnmixingState, workspace: &mut Workspace, cutoff: usize) -> Result<UnmixingState> {
    let (signs, r_hat) = workspace.signs_and_cov(&state.unmixing, cutoff)?;
    let next = multiplicative_update(&r_hat, &state.unmixing)?;
    let change = weight_change(&state.unmixing, &next)?;
    Ok(UnmixingState {
        unmixing: next,
        signs,
        iteration: state.iteration + 1,
        weight_change: change,
    })
}

/// One OgExtInf iteration on `m × t` whitened data.
pub fn update_step(state: &UnmixingState, whitened: &DMatrix<f64>, cutoff: usize) -> Result<UnmixingState> {
    if state.unmixing.shape() != (whitened.nrows(), whitened.nrows()) {
        return Err(IcaError::InvalidInput(format!(
            "unmixing {:?} does not fit {} whitened rows",
            state.unmixing.shape(),
            whitened.nrows()
        )));
    }
    step_in(state, &mut Workspace::new(whitened), cutoff)
}

/// Haar-distributed random orthogonal matrix: QR of a Gaussian matrix with
/// the signs of `R`'s diagonal folded into `Q`.
pub fn random_orthogonal<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for (j, mut col) in q.column_iter_mut().enumerate() {
        if r[(j, j)] < 0.0 {
            col.neg_mut();
        }
    }
    q
}

/// `max |cov(X) − I|`, covariance normalized by `t`.
pub fn whiteness_deviation(whitened: &DMatrix<f64>) -> f64 {
    max_abs_deviation_from_identity(&sample_covariance(whitened))
}

pub(crate) fn check_whiteness(whitened: &DMatrix<f64>, strict: bool) -> Result<()> {
    let deviation = whiteness_deviation(whitened);
    if deviation > WHITENESS_TOLERANCE {
        if strict {
            return Err(IcaError::NotWhitened { deviation });
        }
        warn!("input covariance deviates from identity by {deviation:e}");
    }
    Ok(())
}

pub(crate) fn initial_unmixing(initial: Option<&DMatrix<f64>>, m: usize, require_orthogonal: bool) -> Result<DMatrix<f64>> {
    match initial {
        None => Ok(DMatrix::identity(m, m)),
        Some(w) if w.shape() != (m, m) => Err(IcaError::InvalidInput(format!(
            "initial unmixing is {}x{}, data has {m} components",
            w.nrows(),
            w.ncols()
        ))),
        Some(w) if require_orthogonal && orthogonality_error(w) > ORTHOGONAL_INPUT_TOLERANCE => Err(
            IcaError::InvalidInput("initial unmixing matrix is not orthogonal".into()),
        ),
        Some(w) => Ok(w.clone()),
    }
}

/// Run OgExtInf on whitened data until the weight change falls to the
/// tolerance or the iteration budget is spent.
pub fn run_ogextinf(whitened: &DataMatrix, config: &IterationConfig) -> Result<IcaResult> {
    run_ogextinf_observed(whitened, config, |_| {})
}

/// As [`run_ogextinf`], calling `observe` with the state after every completed iteration.
pub fn run_ogextinf_observed<F>(whitened: &DataMatrix, config: &IterationConfig, mut observe: F) -> Result<IcaResult>
where
    F: FnMut(&UnmixingState),
{
    config.validate()?;
    check_whiteness(whitened, config.strict_whiteness)?;
    let w0 = initial_unmixing(config.initial_unmixing.as_ref(), whitened.n(), true)?;

    let start = Instant::now();
    let mut state = UnmixingState::new(w0);
    let mut record = ConvergenceRecord::default();
    let mut failure = None;
    let mut workspace = Workspace::new(whitened);

    for index in 0..config.max_iterations {
        match step_in(&state, &mut workspace, config.sign_rule_sample_cutoff) {
            Ok(next) => {
                state = next;
                record.iterations.push(IterationRecord {
                    weight_change: state.weight_change,
                    elapsed: start.elapsed(),
                });
                observe(&state);
                if state.weight_change <= config.tolerance {
                    record.converged = true;
                    break;
                }
            }
            Err(e) => {
                failure = Some(e.at_iteration(index));
                break;
            }
        }
    }

    let sources = &state.unmixing * whitened.values();
    Ok(IcaResult {
        algorithm: Algorithm::OgExtInf,
        unmixing: state.unmixing,
        sources,
        signs: state.signs,
        record,
        elapsed: start.elapsed(),
        failure,
        learning_rate: None,
    })
}

/// Estimated sources `S = W·D`.
pub fn apply_unmixing(unmixing: &DMatrix<f64>, data: &DataMatrix) -> Result<DataMatrix> {
    if unmixing.ncols() != data.n() {
        return Err(IcaError::InvalidInput(format!(
            "unmixing has {} columns, data has {} rows",
            unmixing.ncols(),
            data.n()
        )));
    }
    DataMatrix::new(unmixing * data.values())
}
