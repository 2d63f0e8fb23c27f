//! Center → whiten → unmix, the path taken for user-supplied recordings.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::convergence::{Algorithm, IcaResult};
use crate::error::Result;
use crate::extinf::{run_extinf, GradientConfig, DEFAULT_LEARNING_RATE};
use crate::matrix::DataMatrix;
use crate::nonlinearity::DEFAULT_SIGN_CUTOFF;
use crate::ogextinf::{random_orthogonal, run_ogextinf, IterationConfig};
use crate::preprocess::{apply_whitening, fit_whitening, WhiteningModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Initialization {
    Identity,
    /// Haar-random orthogonal start drawn from a seeded ChaCha20 stream.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeConfig {
    pub algorithm: Algorithm,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Minimum variance fraction for a principal component to be kept; 0 keeps all.
    pub pca_variance: f64,
    pub sign_cutoff: usize,
    /// Gradient step size; used by `extinf` only.
    pub learning_rate: f64,
    pub initialization: Initialization,
    pub strict_whiteness: bool,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig {
            algorithm: Algorithm::OgExtInf,
            tolerance: 1e-6,
            max_iterations: 3000,
            pca_variance: 0.01,
            sign_cutoff: DEFAULT_SIGN_CUTOFF,
            learning_rate: DEFAULT_LEARNING_RATE,
            initialization: Initialization::Identity,
            strict_whiteness: false,
        }
    }
}

impl DecomposeConfig {
    pub fn initial_unmixing(&self, m: usize) -> Option<DMatrix<f64>> {
        match self.initialization {
            Initialization::Identity => None,
            Initialization::Random { seed } => {
                Some(random_orthogonal(m, &mut ChaCha20Rng::seed_from_u64(seed)))
            }
        }
    }
}

#[derive(Debug)]
pub struct Decomposition {
    pub whitening: WhiteningModel,
    pub result: IcaResult,
    /// `W · whitener`: maps centered channel data to sources (`m × n`).
    pub composed: DMatrix<f64>,
}

/// Run the configured algorithm on data that is already white.
pub fn run_algorithm(whitened: &DataMatrix, config: &DecomposeConfig) -> Result<IcaResult> {
    let initial_unmixing = config.initial_unmixing(whitened.n());
    match config.algorithm {
        Algorithm::OgExtInf => run_ogextinf(
            whitened,
            &IterationConfig {
                max_iterations: config.max_iterations,
                tolerance: config.tolerance,
                sign_rule_sample_cutoff: config.sign_cutoff,
                initial_unmixing,
                strict_whiteness: config.strict_whiteness,
            },
        ),
        Algorithm::ExtInf => run_extinf(
            whitened,
            &GradientConfig {
                learning_rate: config.learning_rate,
                max_iterations: config.max_iterations,
                tolerance: config.tolerance,
                sign_rule_sample_cutoff: config.sign_cutoff,
                initial_unmixing,
                strict_whiteness: config.strict_whiteness,
                ..GradientConfig::default()
            },
        ),
    }
}

pub fn decompose(data: &DataMatrix, config: &DecomposeConfig) -> Result<Decomposition> {
    let whitening = fit_whitening(data, config.pca_variance)?;
    let whitened = apply_whitening(&whitening, data)?;
    let result = run_algorithm(&whitened, config)?;
    let composed = whitening.compose(&result.unmixing)?;
    Ok(Decomposition { whitening, result, composed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{amari_distance, composed_unmixing};
    use crate::simulate::{make_dataset, ExperimentSpec};

    #[test]
    fn recovers_small_mixture() {
        let spec = ExperimentSpec { n_super: 2, n_sub: 2, samples: 20_000, seed: 3, runs: 1 };
        let ds = make_dataset(&spec, 0).unwrap();
        let config = DecomposeConfig { pca_variance: 0.0, ..Default::default() };
        let out = decompose(&ds.observed, &config).unwrap();
        assert!(out.result.converged());
        let w = composed_unmixing(&out.result.unmixing, &out.whitening).unwrap();
        assert_eq!(w, out.composed);
        assert!(amari_distance(&w, &ds.mixing).unwrap() < 0.1);
    }

    #[test]
    fn random_initialization_is_seeded() {
        let c = DecomposeConfig { initialization: Initialization::Random { seed: 9 }, ..Default::default() };
        assert_eq!(c.initial_unmixing(4), c.initial_unmixing(4));
        assert!(DecomposeConfig::default().initial_unmixing(4).is_none());
    }
}
