//! JSON documents written by the CLI. Field names are part of the interface.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ogica::benchmark::CurvePoint;
use ogica::pipeline::{DecomposeConfig, Decomposition};
use ogica::simulate::ExperimentSpec;
use ogica::{matrix, Algorithm, Sign};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFiles {
    pub observed: String,
    pub sources: String,
    pub mixing: String,
}

/// Written next to the CSV files of a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationManifest {
    pub generator: String,
    pub experiment: Option<u8>,
    pub spec: ExperimentSpec,
    pub run_index: u64,
    /// Mixing matrices rejected as ill-conditioned before the one kept.
    pub regenerations: usize,
    pub channels: usize,
    pub samples: usize,
    pub files: ManifestFiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub path: String,
    pub channels: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhiteningSummary {
    pub retained: usize,
    pub eigenvalues: Vec<f64>,
    pub variance_fractions: Vec<f64>,
    pub mean: Vec<f64>,
}

/// Everything hardware-dependent lives here so results can be compared without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: f64,
    pub algorithm_ms: f64,
    /// Cumulative time at the end of each iteration.
    pub iteration_elapsed_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeOutput {
    pub input: InputSummary,
    pub config: DecomposeConfig,
    pub algorithm: Algorithm,
    pub converged: bool,
    pub iterations_used: usize,
    pub final_weight_change: Option<f64>,
    pub weight_changes: Vec<f64>,
    pub signs: Vec<Sign>,
    /// Effective step size after annealing (extinf only).
    pub learning_rate: Option<f64>,
    pub failure: Option<String>,
    pub whitening: WhiteningSummary,
    /// `m × n`: maps centered channel data to sources.
    pub unmixing: Vec<Vec<f64>>,
    /// `m × m`: the unmixing matrix in whitened coordinates.
    pub unmixing_whitened: Vec<Vec<f64>>,
    pub timing: Timing,
}

impl DecomposeOutput {
    pub fn new(input: InputSummary, config: DecomposeConfig, d: &Decomposition, total_ms: f64) -> Self {
        let r = &d.result;
        DecomposeOutput {
            input,
            config,
            algorithm: r.algorithm,
            converged: r.converged(),
            iterations_used: r.iterations_used(),
            final_weight_change: r.record.final_weight_change(),
            weight_changes: r.record.weight_changes().collect(),
            signs: r.signs.clone(),
            learning_rate: r.learning_rate,
            failure: r.failure.as_ref().map(ToString::to_string),
            whitening: WhiteningSummary {
                retained: d.whitening.retained(),
                eigenvalues: d.whitening.eigenvalues.iter().copied().collect(),
                variance_fractions: d.whitening.variance_fractions().iter().copied().collect(),
                mean: d.whitening.mean.iter().copied().collect(),
            },
            unmixing: matrix::to_rows(&d.composed),
            unmixing_whitened: matrix::to_rows(&r.unmixing),
            timing: Timing {
                total_ms,
                algorithm_ms: r.elapsed.as_secs_f64() * 1e3,
                iteration_elapsed_ms: r
                    .record
                    .iterations
                    .iter()
                    .map(|it| it.elapsed.as_secs_f64() * 1e3)
                    .collect(),
            },
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|source| CliError::Json { path: path.to_path_buf(), source })?;
    out.write_all(b"\n")
        .and_then(|()| out.flush())
        .map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let file = File::open(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|source| CliError::Json { path: path.to_path_buf(), source })
}

pub const CURVES_HEADER: &str = "run_index,algorithm,iteration,weight_change,elapsed_ms";

pub fn write_curves(path: &Path, curves: &[CurvePoint]) -> Result<(), CliError> {
    let wrap = |source| CliError::File { path: path.to_path_buf(), source };
    let mut out = BufWriter::new(File::create(path).map_err(wrap)?);
    writeln!(out, "{CURVES_HEADER}").map_err(wrap)?;
    for c in curves {
        writeln!(
            out,
            "{},{},{},{},{}",
            c.run_index,
            c.algorithm,
            c.iteration,
            ogica::io::format_value(c.weight_change),
            c.elapsed_ms
        )
        .map_err(wrap)?;
    }
    out.flush().map_err(wrap)
}
