use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, IcaError>;

#[derive(Debug, Error)]
pub enum IcaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("component {component} has zero variance")]
    DegenerateComponent { component: usize },

    /// The matrix handed to an inversion or orthogonalization was numerically
    /// rank deficient. `condition` is the singular-value ratio that tripped the guard.
    #[error("singular update (condition estimate {condition:e}){}", fmt_iteration(*.iteration))]
    SingularUpdate {
        condition: f64,
        iteration: Option<usize>,
    },

    #[error("gradient iteration diverged at iteration {iteration} (learning rate {learning_rate:e})")]
    Divergence { iteration: usize, learning_rate: f64 },

    #[error("input is not white: max |cov - I| = {deviation:e}")]
    NotWhitened { deviation: f64 },

    #[error("reduced-rank whitening ({retained} of {channels} components retained)")]
    ReducedRank { retained: usize, channels: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("no well-conditioned mixing matrix after {attempts} attempts")]
    MixingGeneration { attempts: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: row {row}, column {column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },
}

fn fmt_iteration(iteration: Option<usize>) -> String {
    match iteration {
        Some(i) => format!(" at iteration {i}"),
        None => String::new(),
    }
}

impl IcaError {
    /// Attach an iteration index to a singular-update error raised inside a step.
    pub(crate) fn at_iteration(self, index: usize) -> Self {
        match self {
            IcaError::SingularUpdate { condition, .. } => IcaError::SingularUpdate {
                condition,
                iteration: Some(index),
            },
            other => other,
        }
    }

    /// True for failures of the numerics rather than of the caller's input or the filesystem.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            IcaError::DegenerateData(_)
                | IcaError::DegenerateComponent { .. }
                | IcaError::SingularUpdate { .. }
                | IcaError::Divergence { .. }
                | IcaError::NotWhitened { .. }
                | IcaError::ReducedRank { .. }
                | IcaError::UndefinedMetric(_)
                | IcaError::MixingGeneration { .. }
        )
    }
}
