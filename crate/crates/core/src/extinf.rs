//! Natural-gradient extended infomax, full batch:
//! `W ← W + ε·(I − (1/t)·φ(S)·Sᵀ)·W`.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::convergence::{Algorithm, ConvergenceRecord, IcaResult, IterationRecord};
use crate::error::{IcaError, Result};
use crate::matrix::DataMatrix;
use crate::nonlinearity::{higher_order_cov, select_signs, Sign, DEFAULT_SIGN_CUTOFF};
use crate::ogextinf::{check_whiteness, initial_unmixing, weight_change, Workspace};

pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;

/// How many times a step may halve the learning rate before giving up.
pub const MAX_ANNEAL_HALVINGS: usize = 10;

#[derive(Debug, Clone)]
pub struct GradientConfig {
    pub learning_rate: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Halve the learning rate and retry when a step blows up.
    pub anneal: bool,
    /// A step whose weight change exceeds this counts as a blow-up.
    pub blowup_threshold: f64,
    pub sign_rule_sample_cutoff: usize,
    pub initial_unmixing: Option<DMatrix<f64>>,
    pub strict_whiteness: bool,
}

impl Default for GradientConfig {
    fn default() -> Self {
        GradientConfig {
            learning_rate: DEFAULT_LEARNING_RATE,
            max_iterations: 1000,
            tolerance: 1e-6,
            anneal: true,
            blowup_threshold: 1e3,
            sign_rule_sample_cutoff: DEFAULT_SIGN_CUTOFF,
            initial_unmixing: None,
            strict_whiteness: false,
        }
    }
}

impl GradientConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(IcaError::InvalidParameter(format!(
                "learning rate must be finite and nonnegative, got {}",
                self.learning_rate
            )));
        }
        if self.max_iterations < 1 {
            return Err(IcaError::InvalidParameter("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(IcaError::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientStep {
    pub unmixing: DMatrix<f64>,
    pub weight_change: f64,
    pub signs: Vec<Sign>,
    /// Learning rate actually used; lower than requested after annealing.
    pub learning_rate: f64,
}

/// Relative gradient `G = I − (1/t)·φ(S)·Sᵀ` and the signs used to form it.
pub fn natural_gradient(sources: &DMatrix<f64>, cutoff: usize) -> Result<(DMatrix<f64>, Vec<Sign>)> {
    let m = sources.nrows();
    let signs = select_signs(sources, cutoff)?;
    let g = DMatrix::identity(m, m) - higher_order_cov(sources, &signs);
    Ok((g, signs))
}

/// One full-batch gradient step from `unmixing`.
pub fn extinf_step(
    unmixing: &DMatrix<f64>,
    whitened: &DMatrix<f64>,
    config: &GradientConfig,
    cutoff: usize,
) -> Result<GradientStep> {
    if !unmixing.is_square() || unmixing.ncols() != whitened.nrows() {
        return Err(IcaError::InvalidInput(format!(
            "unmixing {}x{} does not fit {} whitened rows",
            unmixing.nrows(),
            unmixing.ncols(),
            whitened.nrows()
        )));
    }
    step_in(unmixing, &mut Workspace::new(whitened), config, cutoff)
}

fn step_in(
    unmixing: &DMatrix<f64>,
    workspace: &mut Workspace,
    config: &GradientConfig,
    cutoff: usize,
) -> Result<GradientStep> {
    let m = workspace.components();
    let (signs, r_hat) = workspace.signs_and_cov(unmixing, cutoff)?;
    let direction = (DMatrix::identity(m, m) - r_hat) * unmixing;

    let mut eps = config.learning_rate;
    let attempts = if config.anneal { MAX_ANNEAL_HALVINGS + 1 } else { 1 };
    for _ in 0..attempts {
        let next = unmixing + &direction * eps;
        if next.iter().all(|v| v.is_finite()) {
            let change = weight_change(unmixing, &next)?;
            if !config.anneal || change <= config.blowup_threshold {
                return Ok(GradientStep {
                    unmixing: next,
                    weight_change: change,
                    signs,
                    learning_rate: eps,
                });
            }
        }
        eps *= 0.5;
    }
    Err(IcaError::Divergence {
        iteration: 0,
        learning_rate: eps * 2.0,
    })
}

pub fn run_extinf(whitened: &DataMatrix, config: &GradientConfig) -> Result<IcaResult> {
    config.validate()?;
    check_whiteness(whitened, config.strict_whiteness)?;
    let mut unmixing = initial_unmixing(config.initial_unmixing.as_ref(), whitened.n(), false)?;

    let start = Instant::now();
    let mut record = ConvergenceRecord::default();
    let mut signs = vec![Sign::Super; whitened.n()];
    let mut eps = config.learning_rate;
    let mut failure = None;
    let mut workspace = Workspace::new(whitened);
    let mut step_config = GradientConfig {
        initial_unmixing: None,
        ..config.clone()
    };

    for index in 0..config.max_iterations {
        step_config.learning_rate = eps;
        match step_in(&unmixing, &mut workspace, &step_config, config.sign_rule_sample_cutoff) {
            Ok(step) => {
                unmixing = step.unmixing;
                signs = step.signs;
                eps = step.learning_rate;
                record.iterations.push(IterationRecord {
                    weight_change: step.weight_change,
                    elapsed: start.elapsed(),
                });
                if step.weight_change <= config.tolerance {
                    record.converged = true;
                    break;
                }
            }
            Err(IcaError::Divergence { learning_rate, .. }) => {
                failure = Some(IcaError::Divergence {
                    iteration: index,
                    learning_rate,
                });
                break;
            }
            Err(e) => {
                failure = Some(e.at_iteration(index));
                break;
            }
        }
    }

    let sources = &unmixing * whitened.values();
    Ok(IcaResult {
        algorithm: Algorithm::ExtInf,
        unmixing,
        sources,
        signs,
        record,
        elapsed: start.elapsed(),
        failure,
        learning_rate: Some(eps),
    })
}
