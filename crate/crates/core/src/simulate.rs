//! Seeded synthetic mixtures of Laplacian (super-Gaussian) and uniform
//! (sub-Gaussian) sources.
//!
//! Every dataset draws from its own ChaCha20 stream: the generator is seeded
//! with the experiment seed and the stream id is the run index, so datasets are
//! reproducible regardless of the order in which runs are generated.

use nalgebra::DMatrix;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{IcaError, Result};
use crate::matrix::DataMatrix;

/// Recorded in manifests and reports so results can be regenerated.
pub const GENERATOR_ID: &str =
    "rand_chacha 0.9 ChaCha20Rng; seed_from_u64(seed), set_stream(run_index); sources row by row, then mixing row-major";

/// Mixing matrices with a larger 2-norm condition number are redrawn.
pub const MIXING_CONDITION_LIMIT: f64 = 1e6;
pub const MIXING_MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Laplacian sources, placed first.
    pub n_super: usize,
    /// Uniform sources, placed after the Laplacian ones.
    pub n_sub: usize,
    pub samples: usize,
    pub seed: u64,
    pub runs: usize,
}

impl ExperimentSpec {
    /// 10 Laplacian + 10 uniform sources, 5000 samples, 100 runs.
    pub fn experiment1(seed: u64) -> Self {
        ExperimentSpec { n_super: 10, n_sub: 10, samples: 5000, seed, runs: 100 }
    }

    /// 25 Laplacian + 25 uniform sources, 10000 samples, 100 runs.
    pub fn experiment2(seed: u64) -> Self {
        ExperimentSpec { n_super: 25, n_sub: 25, samples: 10_000, seed, runs: 100 }
    }

    pub fn preset(experiment: u8, seed: u64) -> Result<Self> {
        match experiment {
            1 => Ok(Self::experiment1(seed)),
            2 => Ok(Self::experiment2(seed)),
            other => Err(IcaError::InvalidParameter(format!("unknown experiment preset {other}"))),
        }
    }

    pub fn channels(&self) -> usize {
        self.n_super + self.n_sub
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels() < 2 {
            return Err(IcaError::InvalidParameter("an experiment needs at least two sources".into()));
        }
        if self.samples < 2 {
            return Err(IcaError::InvalidParameter("an experiment needs at least two samples".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDataset {
    pub sources: DataMatrix,
    pub mixing: DMatrix<f64>,
    /// `mixing · sources`.
    pub observed: DataMatrix,
    pub seed: u64,
    pub run_index: u64,
    /// Mixing matrices discarded by the condition guard.
    pub regenerations: usize,
}

/// Inverse-CDF transform of `u ∈ (0, 1)` to the unit-scale Laplace distribution.
#[inline]
pub fn laplace_inverse_cdf(u: f64) -> f64 {
    let d = u - 0.5;
    if d == 0.0 {
        return 0.0;
    }
    -d.signum() * (1.0 - 2.0 * d.abs()).ln()
}

/// Draws from `p(x) = ½·e^{−|x|}` (variance 2).
pub fn sample_laplacian<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| laplace_inverse_cdf(rng.sample(Open01))).collect()
}

/// Draws from the uniform density on `[−2, 2]` (variance 4/3).
pub fn sample_uniform2<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| 4.0 * rng.random::<f64>() - 2.0).collect()
}

/// `n × n` standard normal matrix, redrawn while its condition number exceeds
/// [`MIXING_CONDITION_LIMIT`]. Returns the matrix and the number of redraws.
pub fn random_mixing<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(DMatrix<f64>, usize)> {
    if n < 2 {
        return Err(IcaError::InvalidParameter(format!("mixing matrix needs n >= 2, got {n}")));
    }
    for attempt in 0..MIXING_MAX_ATTEMPTS {
        // from_fn fills column-major; draw row-major so the layout is obvious.
        let draws: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        let a = DMatrix::from_row_slice(n, n, &draws);
        let sv = a.singular_values();
        let condition = sv.max() / sv.min();
        if condition.is_finite() && condition <= MIXING_CONDITION_LIMIT {
            return Ok((a, attempt));
        }
    }
    Err(IcaError::MixingGeneration { attempts: MIXING_MAX_ATTEMPTS })
}

pub fn dataset_rng(seed: u64, run_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(run_index);
    rng
}

pub fn make_dataset(spec: &ExperimentSpec, run_index: u64) -> Result<MixtureDataset> {
    spec.validate()?;
    let mut rng = dataset_rng(spec.seed, run_index);
    let (n, t) = (spec.channels(), spec.samples);

    let mut rows = Vec::with_capacity(n);
    for _ in 0..spec.n_super {
        rows.push(sample_laplacian(t, &mut rng));
    }
    for _ in 0..spec.n_sub {
        rows.push(sample_uniform2(t, &mut rng));
    }
    let sources = DataMatrix::from_rows(&rows)?;
    let (mixing, regenerations) = random_mixing(n, &mut rng)?;
    let observed = DataMatrix::new(&mixing * sources.values())?;

    Ok(MixtureDataset {
        sources,
        mixing,
        observed,
        seed: spec.seed,
        run_index,
        regenerations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(x: &[f64]) -> (f64, f64, f64) {
        let t = x.len() as f64;
        let mean = x.iter().sum::<f64>() / t;
        let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / t;
        let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / t;
        (mean, m2, m4 / (m2 * m2) - 3.0)
    }

    #[test]
    fn laplace_median() {
        assert_eq!(laplace_inverse_cdf(0.5), 0.0);
        assert!(laplace_inverse_cdf(0.75) > 0.0);
        assert!((laplace_inverse_cdf(0.75) + laplace_inverse_cdf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn laplace_moments() {
        let x = sample_laplacian(1_000_000, &mut dataset_rng(1, 0));
        let (mean, var, kurt) = moments(&x);
        assert!(mean.abs() <= 0.01, "mean {mean}");
        assert!((1.98..=2.02).contains(&var), "var {var}");
        assert!((2.8..=3.2).contains(&kurt), "kurt {kurt}");
    }

    #[test]
    fn laplace_ks_statistic() {
        let mut x = sample_laplacian(100_000, &mut dataset_rng(2, 0));
        x.sort_by(f64::total_cmp);
        let cdf = |v: f64| if v < 0.0 { 0.5 * v.exp() } else { 1.0 - 0.5 * (-v).exp() };
        let t = x.len() as f64;
        let d = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = cdf(v);
                (f - i as f64 / t).abs().max(((i + 1) as f64 / t - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(d <= 1.63 / t.sqrt(), "KS statistic {d}");
    }

    #[test]
    fn uniform_support_and_moments() {
        let x = sample_uniform2(1_000_000, &mut dataset_rng(3, 0));
        assert!(x.iter().all(|v| (-2.0..=2.0).contains(v)));
        let (_, var, kurt) = moments(&x);
        assert!((1.32..=1.35).contains(&var), "var {var}");
        assert!((-1.22..=-1.18).contains(&kurt), "kurt {kurt}");
    }

    #[test]
    fn mixing_entries_are_standard_normal() {
        let mut rng = dataset_rng(4, 0);
        let mut all = Vec::new();
        while all.len() < 1_000_000 {
            let (a, _) = random_mixing(50, &mut rng).unwrap();
            all.extend(a.iter().copied());
        }
        let (mean, var, _) = moments(&all);
        assert!(mean.abs() <= 0.01 && (0.99..=1.01).contains(&var), "{mean} {var}");
    }

    #[test]
    fn mixing_determinism_and_shape() {
        let (a, _) = random_mixing(5, &mut dataset_rng(9, 0)).unwrap();
        let (b, _) = random_mixing(5, &mut dataset_rng(9, 0)).unwrap();
        let (c, _) = random_mixing(5, &mut dataset_rng(10, 0)).unwrap();
        assert_eq!(a.shape(), (5, 5));
        assert!(a.iter().all(|v| v.is_finite()));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(random_mixing(1, &mut dataset_rng(9, 0)).is_err());
    }

    #[test]
    fn presets_have_documented_shapes() {
        let d1 = make_dataset(&ExperimentSpec::experiment1(7), 0).unwrap();
        assert_eq!(d1.observed.shape(), (20, 5000));
        let d2 = make_dataset(&ExperimentSpec::experiment2(7), 0).unwrap();
        assert_eq!(d2.observed.shape(), (50, 10_000));
        assert_eq!(d2.mixing.shape(), (50, 50));
    }

    #[test]
    fn datasets_are_reproducible_per_run() {
        let spec = ExperimentSpec { n_super: 2, n_sub: 2, samples: 300, seed: 42, runs: 3 };
        let a = make_dataset(&spec, 1).unwrap();
        let b = make_dataset(&spec, 1).unwrap();
        let c = make_dataset(&spec, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.observed, c.observed);
        assert_eq!(a.observed.values(), &(&a.mixing * a.sources.values()));
    }

    #[test]
    fn source_rows_by_type() {
        let spec = ExperimentSpec { n_super: 2, n_sub: 2, samples: 20_000, seed: 5, runs: 1 };
        let d = make_dataset(&spec, 0).unwrap();
        for i in 0..4 {
            let row: Vec<f64> = d.sources.row(i).iter().copied().collect();
            let (_, _, kurt) = moments(&row);
            assert_eq!(kurt > 0.0, i < 2, "row {i} kurtosis {kurt}");
        }
    }

    #[test]
    fn sources_are_nearly_uncorrelated() {
        let spec = ExperimentSpec { n_super: 5, n_sub: 5, samples: 100_000, seed: 8, runs: 1 };
        let d = make_dataset(&spec, 0).unwrap();
        let (centered, _) = crate::preprocess::center(&d.sources);
        let cov = crate::matrix::sample_covariance(&centered);
        let bound = 5.0 / (spec.samples as f64).sqrt();
        let (mut ok, mut total) = (0, 0);
        for i in 0..10 {
            for j in (i + 1)..10 {
                let corr = cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt();
                total += 1;
                if corr.abs() <= bound {
                    ok += 1;
                }
            }
        }
        assert!(ok as f64 >= 0.95 * total as f64, "{ok}/{total}");
    }

    #[test]
    fn invalid_specs() {
        let bad = ExperimentSpec { n_super: 1, n_sub: 0, samples: 100, seed: 0, runs: 1 };
        assert!(make_dataset(&bad, 0).is_err());
        let bad = ExperimentSpec { n_super: 1, n_sub: 1, samples: 1, seed: 0, runs: 1 };
        assert!(make_dataset(&bad, 0).is_err());
        assert!(ExperimentSpec::preset(3, 0).is_err());
    }
}
