//! Replicated simulation runs and their aggregated report.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convergence::{Algorithm, IcaResult};
use crate::error::{IcaError, Result};
use crate::extinf::DEFAULT_LEARNING_RATE;
use crate::metrics::{aggregate, amari_distance, AlgorithmAggregate, RunRecord};
use crate::nonlinearity::DEFAULT_SIGN_CUTOFF;
use crate::pipeline::{run_algorithm, DecomposeConfig, Initialization};
use crate::preprocess::{apply_whitening, fit_whitening};
use crate::simulate::{make_dataset, ExperimentSpec, MixtureDataset, GENERATOR_ID};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub experiment: ExperimentSpec,
    pub algorithms: Vec<Algorithm>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub learning_rate: f64,
    pub sign_cutoff: usize,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
}

impl BenchmarkConfig {
    pub fn new(experiment: ExperimentSpec) -> Self {
        BenchmarkConfig {
            experiment,
            algorithms: vec![Algorithm::OgExtInf, Algorithm::ExtInf],
            tolerance: 1e-6,
            max_iterations: 1000,
            learning_rate: DEFAULT_LEARNING_RATE,
            sign_cutoff: DEFAULT_SIGN_CUTOFF,
            jobs: 1,
        }
    }

    /// Settings for one algorithm. Simulated data is never dimension-reduced.
    pub fn decompose_config(&self, algorithm: Algorithm) -> DecomposeConfig {
        DecomposeConfig {
            algorithm,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            pca_variance: 0.0,
            sign_cutoff: self.sign_cutoff,
            learning_rate: self.learning_rate,
            initialization: Initialization::Identity,
            strict_whiteness: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub generator: String,
    pub config: BenchmarkConfig,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<AlgorithmAggregate>,
}

impl BenchmarkReport {
    pub fn from_records(config: BenchmarkConfig, records: Vec<RunRecord>) -> Result<Self> {
        let aggregates = aggregate(&records)?;
        Ok(BenchmarkReport {
            generator: GENERATOR_ID.to_string(),
            config,
            records,
            aggregates,
        })
    }

    /// Recompute the aggregates from the per-run records and require an exact match.
    pub fn verify(&self) -> Result<()> {
        if aggregate(&self.records)? != self.aggregates {
            return Err(IcaError::InvalidInput(
                "stored aggregates do not match the per-run records".into(),
            ));
        }
        Ok(())
    }

    pub fn aggregate_for(&self, algorithm: Algorithm) -> Option<&AlgorithmAggregate> {
        self.aggregates.iter().find(|a| a.algorithm == algorithm)
    }
}

/// One point of a weight-change curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub run_index: u64,
    pub algorithm: Algorithm,
    pub iteration: usize,
    pub weight_change: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkOutcome {
    pub report: BenchmarkReport,
    pub curves: Vec<CurvePoint>,
}

/// Whiten a simulated dataset (no reduction), run one algorithm, and score the
/// composed unmixing against the true mixing matrix.
pub fn evaluate(dataset: &MixtureDataset, config: &DecomposeConfig) -> Result<(IcaResult, Option<f64>)> {
    let whitening = fit_whitening(&dataset.observed, 0.0)?;
    let whitened = apply_whitening(&whitening, &dataset.observed)?;
    let result = run_algorithm(&whitened, config)?;
    let amari = whitening
        .compose(&result.unmixing)
        .and_then(|w| amari_distance(&w, &dataset.mixing))
        .ok();
    Ok((result, amari))
}

fn failed_record(run_index: u64, algorithm: Algorithm, err: &IcaError) -> RunRecord {
    RunRecord {
        run_index,
        algorithm,
        iterations_used: 0,
        converged: false,
        final_weight_change: None,
        amari_distance: None,
        wall_time_ms: 0.0,
        learning_rate: None,
        failure: Some(err.to_string()),
    }
}

fn run_one(config: &BenchmarkConfig, run_index: u64) -> Vec<(RunRecord, Vec<CurvePoint>)> {
    let dataset = match make_dataset(&config.experiment, run_index) {
        Ok(d) => d,
        Err(e) => {
            return config
                .algorithms
                .iter()
                .map(|&a| (failed_record(run_index, a, &e), Vec::new()))
                .collect()
        }
    };
    config
        .algorithms
        .iter()
        .map(|&algorithm| {
            let started = Instant::now();
            match evaluate(&dataset, &config.decompose_config(algorithm)) {
                Ok((result, amari)) => {
                    let curve = result
                        .record
                        .iterations
                        .iter()
                        .enumerate()
                        .map(|(i, it)| CurvePoint {
                            run_index,
                            algorithm,
                            iteration: i + 1,
                            weight_change: it.weight_change,
                            elapsed_ms: it.elapsed.as_secs_f64() * 1e3,
                        })
                        .collect();
                    let record = RunRecord {
                        run_index,
                        algorithm,
                        iterations_used: result.iterations_used(),
                        converged: result.converged(),
                        final_weight_change: result.record.final_weight_change(),
                        amari_distance: amari,
                        wall_time_ms: result.elapsed.as_secs_f64() * 1e3,
                        learning_rate: result.learning_rate,
                        failure: result.failure.as_ref().map(ToString::to_string),
                    };
                    (record, curve)
                }
                Err(e) => {
                    log::warn!("run {run_index} {algorithm} failed after {:?}: {e}", started.elapsed());
                    (failed_record(run_index, algorithm, &e), Vec::new())
                }
            }
        })
        .collect()
}

pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkOutcome> {
    config.experiment.validate()?;
    if config.experiment.runs == 0 {
        return Err(IcaError::InvalidParameter("benchmark needs at least one run".into()));
    }
    if config.algorithms.is_empty() {
        return Err(IcaError::InvalidParameter("benchmark needs at least one algorithm".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| IcaError::InvalidParameter(format!("thread pool: {e}")))?;

    let per_run: Vec<Vec<(RunRecord, Vec<CurvePoint>)>> = pool.install(|| {
        (0..config.experiment.runs as u64)
            .into_par_iter()
            .map(|run| run_one(config, run))
            .collect()
    });

    let mut records = Vec::new();
    let mut curves = Vec::new();
    for (record, curve) in per_run.into_iter().flatten() {
        records.push(record);
        curves.extend(curve);
    }
    Ok(BenchmarkOutcome {
        report: BenchmarkReport::from_records(config.clone(), records)?,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchmarkConfig {
        let mut c = BenchmarkConfig::new(ExperimentSpec { n_super: 2, n_sub: 2, samples: 2000, seed: 1, runs: 3 });
        c.max_iterations = 200;
        c
    }

    #[test]
    fn records_are_run_major_and_consistent() {
        let out = run_benchmark(&small()).unwrap();
        let r = &out.report;
        assert_eq!(r.records.len(), 6);
        assert_eq!(r.records[0].algorithm, Algorithm::OgExtInf);
        assert_eq!(r.records[1].algorithm, Algorithm::ExtInf);
        assert_eq!(r.records[2].run_index, 1);
        r.verify().unwrap();
        let total: usize = r.records.iter().map(|x| x.iterations_used).sum();
        assert_eq!(out.curves.len(), total);
    }

    #[test]
    fn job_count_does_not_change_results() {
        let a = run_benchmark(&small()).unwrap();
        let mut c = small();
        c.jobs = 3;
        let b = run_benchmark(&c).unwrap();
        for (x, y) in a.report.records.iter().zip(&b.report.records) {
            assert_eq!(x.iterations_used, y.iterations_used);
            assert_eq!(x.final_weight_change, y.final_weight_change);
            assert_eq!(x.amari_distance, y.amari_distance);
        }
    }

    #[test]
    fn tampered_report_fails_verification() {
        let mut r = run_benchmark(&small()).unwrap().report;
        r.records[0].iterations_used += 1000;
        assert!(r.verify().is_err());
    }
}
