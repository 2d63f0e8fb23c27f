use std::fs;
use std::path::Path;
use std::time::Instant;

use ogica::benchmark::{run_benchmark, BenchmarkConfig, BenchmarkReport};
use ogica::io::{read_matrix_file, write_matrix_file};
use ogica::pipeline::{decompose, DecomposeConfig, Initialization};
use ogica::simulate::{make_dataset, ExperimentSpec, GENERATOR_ID};
use ogica::{Algorithm, DataMatrix};

use crate::args::{BenchmarkArgs, Cli, Command, DecomposeArgs, InitArg, SimulateArgs};
use crate::output::{
    read_json, write_curves, write_json, DecomposeOutput, InputSummary, ManifestFiles, SimulationManifest,
};
use crate::{CliError, ExitCode};

pub const OBSERVED_FILE: &str = "observed.csv";
pub const SOURCES_FILE: &str = "sources.csv";
pub const MIXING_FILE: &str = "mixing.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Simulate(args) => simulate(&args).map(|_| ExitCode::Success),
        Command::Decompose(args) => {
            let out = decompose_file(&args)?;
            Ok(if out.failure.is_some() {
                ExitCode::Numerical
            } else if !out.converged {
                ExitCode::NotConverged
            } else {
                ExitCode::Success
            })
        }
        Command::Benchmark(args) => benchmark(&args).map(|_| ExitCode::Success),
    }
}

fn simulation_spec(args: &SimulateArgs) -> Result<ExperimentSpec, CliError> {
    let mut spec = match (args.experiment, args.n_super, args.n_sub, args.samples) {
        (Some(e), None, None, None) => ExperimentSpec::preset(e, args.seed)?,
        (None, Some(n_super), Some(n_sub), Some(samples)) => {
            ExperimentSpec { n_super, n_sub, samples, seed: args.seed, runs: 1 }
        }
        _ => {
            return Err(CliError::Usage(
                "give either --experiment or all of --n-super, --n-sub and --samples".into(),
            ))
        }
    };
    spec.runs = 1;
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(spec)
}

pub fn simulate(args: &SimulateArgs) -> Result<SimulationManifest, CliError> {
    let spec = simulation_spec(args)?;
    let dataset = make_dataset(&spec, args.run)?;
    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::File { path: dir.clone(), source })?;
    write_matrix_file(dir.join(OBSERVED_FILE), dataset.observed.values())?;
    write_matrix_file(dir.join(SOURCES_FILE), dataset.sources.values())?;
    write_matrix_file(dir.join(MIXING_FILE), &dataset.mixing)?;
    let manifest = SimulationManifest {
        generator: GENERATOR_ID.to_string(),
        experiment: args.experiment,
        channels: spec.channels(),
        samples: spec.samples,
        spec,
        run_index: args.run,
        regenerations: dataset.regenerations,
        files: ManifestFiles {
            observed: OBSERVED_FILE.into(),
            sources: SOURCES_FILE.into(),
            mixing: MIXING_FILE.into(),
        },
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    log::info!("wrote {} × {} mixture to {}", manifest.channels, manifest.samples, dir.display());
    Ok(manifest)
}

pub fn decompose_config(args: &DecomposeArgs) -> DecomposeConfig {
    DecomposeConfig {
        algorithm: args.algorithm.into(),
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        pca_variance: args.pca_variance,
        sign_cutoff: args.sign_cutoff,
        learning_rate: args.learning_rate,
        initialization: match args.init {
            InitArg::Identity => Initialization::Identity,
            InitArg::Random => Initialization::Random { seed: args.seed },
        },
        strict_whiteness: args.strict,
    }
}

fn load_data(path: &Path) -> Result<DataMatrix, CliError> {
    let values = read_matrix_file(path)?;
    DataMatrix::new(values).map_err(|source| CliError::Input { path: path.to_path_buf(), source })
}

/// Write the result file whenever the algorithm ran, converged or not.
pub fn decompose_file(args: &DecomposeArgs) -> Result<DecomposeOutput, CliError> {
    let started = Instant::now();
    let data = load_data(&args.input)?;
    let config = decompose_config(args);
    let decomposition = decompose(&data, &config)?;
    let output = DecomposeOutput::new(
        InputSummary {
            path: args.input.display().to_string(),
            channels: data.n(),
            samples: data.t(),
        },
        config,
        &decomposition,
        started.elapsed().as_secs_f64() * 1e3,
    );
    write_json(&args.output, &output)?;
    if let Some(path) = &args.sources {
        write_matrix_file(path, &decomposition.result.sources)?;
    }
    match &output.failure {
        Some(f) => log::error!("{f}"),
        None if !output.converged => log::warn!(
            "no convergence after {} iterations (last weight change {:?})",
            output.iterations_used,
            output.final_weight_change
        ),
        None => log::info!("converged after {} iterations", output.iterations_used),
    }
    Ok(output)
}

pub fn benchmark_config(args: &BenchmarkArgs) -> Result<BenchmarkConfig, CliError> {
    let mut experiment = ExperimentSpec::preset(args.experiment, args.seed)?;
    experiment.runs = args.runs;
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for a in &args.algorithms {
        let a = Algorithm::from(*a);
        if !algorithms.contains(&a) {
            algorithms.push(a);
        }
    }
    Ok(BenchmarkConfig {
        experiment,
        algorithms,
        tolerance: args.tolerance,
        max_iterations: args.max_iterations,
        learning_rate: args.learning_rate,
        sign_cutoff: args.sign_cutoff,
        jobs: args.jobs,
    })
}

pub fn benchmark(args: &BenchmarkArgs) -> Result<BenchmarkReport, CliError> {
    let config = benchmark_config(args)?;
    let outcome = run_benchmark(&config).map_err(|e| match e {
        ogica::IcaError::InvalidParameter(m) => CliError::Usage(m),
        e => e.into(),
    })?;
    write_json(&args.output, &outcome.report)?;
    if let Some(path) = &args.curves {
        write_curves(path, &outcome.curves)?;
    }
    for a in &outcome.report.aggregates {
        log::info!(
            "{}: {}/{} converged, median iterations {}",
            a.algorithm,
            a.converged,
            a.runs,
            a.iterations.median
        );
    }
    Ok(outcome.report)
}

/// Read a report back and check its aggregates against its own per-run records.
pub fn load_report(path: &Path) -> Result<BenchmarkReport, CliError> {
    let report: BenchmarkReport = read_json(path)?;
    report.verify()?;
    Ok(report)
}
