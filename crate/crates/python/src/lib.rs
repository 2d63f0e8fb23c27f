//! Python bindings. Matrices cross the boundary as lists of rows.

use ogica::benchmark::{run_benchmark, BenchmarkConfig};
use ogica::convergence::IcaResult;
use ogica::matrix::to_rows;
use ogica::pipeline::{DecomposeConfig, Decomposition, Initialization};
use ogica::simulate::ExperimentSpec;
use ogica::{Algorithm, DMatrix, DataMatrix, IcaError, Sign};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(pyogica, OgicaError, PyException, "Base class for errors raised by ogica.");
create_exception!(pyogica, NumericalError, OgicaError, "Degenerate data, singular updates or divergence.");

fn to_py(e: IcaError) -> PyErr {
    if e.is_numerical() {
        NumericalError::new_err(e.to_string())
    } else {
        OgicaError::new_err(e.to_string())
    }
}

type Rows = Vec<Vec<f64>>;

fn matrix(rows: Rows) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let t = rows.first().map_or(0, Vec::len);
    if n == 0 || t == 0 {
        return Err(PyValueError::new_err("matrix must have at least one row and one column"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != t) {
        return Err(PyValueError::new_err(format!("row {i} has {} entries, expected {t}", rows[i].len())));
    }
    Ok(DMatrix::from_row_iterator(n, t, rows.into_iter().flatten()))
}

fn data(rows: Rows) -> PyResult<DataMatrix> {
    DataMatrix::new(matrix(rows)?).map_err(to_py)
}

fn algorithm(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(PyValueError::new_err)
}

fn sign(s: Sign) -> i8 {
    match s {
        Sign::Super => 1,
        Sign::Sub => -1,
    }
}

/// One simulated mixture: `observed = mixing · sources`.
#[pyclass(module = "pyogica", get_all, frozen)]
pub struct Dataset {
    sources: Rows,
    mixing: Rows,
    observed: Rows,
    seed: u64,
    run_index: u64,
}

/// Centering and (optionally reduced) PCA whitening fitted to a data matrix.
#[pyclass(module = "pyogica", frozen)]
pub struct Whitening(ogica::preprocess::WhiteningModel);

#[pymethods]
impl Whitening {
    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.0.mean.iter().copied().collect()
    }
    #[getter]
    fn whitener(&self) -> Rows {
        to_rows(&self.0.whitener)
    }
    #[getter]
    fn dewhitener(&self) -> Rows {
        to_rows(&self.0.dewhitener)
    }
    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues.iter().copied().collect()
    }
    #[getter]
    fn retained(&self) -> usize {
        self.0.retained()
    }

    fn apply(&self, data_rows: Rows) -> PyResult<Rows> {
        let white = ogica::preprocess::apply_whitening(&self.0, &data(data_rows)?).map_err(to_py)?;
        Ok(white.to_rows())
    }
}

/// Outcome of one ICA run.
#[pyclass(module = "pyogica", get_all, frozen)]
pub struct IcaRun {
    algorithm: String,
    /// Unmixing matrix in the coordinates the algorithm saw.
    unmixing: Rows,
    /// For `decompose`: maps centered channel data to sources. Equal to `unmixing` otherwise.
    composed: Rows,
    sources: Rows,
    signs: Vec<i8>,
    weight_changes: Vec<f64>,
    converged: bool,
    iterations_used: usize,
    learning_rate: Option<f64>,
    failure: Option<String>,
    elapsed_ms: f64,
}

impl IcaRun {
    fn new(result: IcaResult, composed: Option<DMatrix<f64>>) -> Self {
        IcaRun {
            algorithm: result.algorithm.name().to_string(),
            composed: to_rows(composed.as_ref().unwrap_or(&result.unmixing)),
            unmixing: to_rows(&result.unmixing),
            sources: to_rows(&result.sources),
            signs: result.signs.iter().map(|&s| sign(s)).collect(),
            weight_changes: result.record.weight_changes().collect(),
            converged: result.converged(),
            iterations_used: result.iterations_used(),
            learning_rate: result.learning_rate,
            failure: result.failure.as_ref().map(ToString::to_string),
            elapsed_ms: result.elapsed.as_secs_f64() * 1e3,
        }
    }
}

#[pymethods]
impl IcaRun {
    fn __repr__(&self) -> String {
        format!(
            "IcaRun(algorithm={:?}, converged={}, iterations_used={})",
            self.algorithm, self.converged, self.iterations_used
        )
    }
}

/// Draw `n_super` Laplacian and `n_sub` uniform sources and mix them.
#[pyfunction]
#[pyo3(signature = (n_super, n_sub, samples, seed, run_index = 0))]
fn simulate(n_super: usize, n_sub: usize, samples: usize, seed: u64, run_index: u64) -> PyResult<Dataset> {
    let spec = ExperimentSpec { n_super, n_sub, samples, seed, runs: 1 };
    let ds = ogica::simulate::make_dataset(&spec, run_index).map_err(to_py)?;
    Ok(Dataset {
        sources: ds.sources.to_rows(),
        mixing: to_rows(&ds.mixing),
        observed: ds.observed.to_rows(),
        seed,
        run_index,
    })
}

#[pyfunction]
#[pyo3(signature = (data_rows, variance_threshold = 0.0))]
fn fit_whitening(data_rows: Rows, variance_threshold: f64) -> PyResult<Whitening> {
    ogica::preprocess::fit_whitening(&data(data_rows)?, variance_threshold)
        .map(Whitening)
        .map_err(to_py)
}

#[allow(clippy::too_many_arguments)]
fn config(
    algorithm_name: &str,
    tolerance: f64,
    max_iterations: usize,
    pca_variance: f64,
    sign_cutoff: usize,
    learning_rate: f64,
    seed: Option<u64>,
    strict: bool,
) -> PyResult<DecomposeConfig> {
    Ok(DecomposeConfig {
        algorithm: algorithm(algorithm_name)?,
        tolerance,
        max_iterations,
        pca_variance,
        sign_cutoff,
        learning_rate,
        initialization: seed.map_or(Initialization::Identity, |seed| Initialization::Random { seed }),
        strict_whiteness: strict,
    })
}

/// Run an algorithm on data that is already white (identity covariance).
#[pyfunction]
#[pyo3(signature = (whitened, algorithm = "ogextinf", tolerance = 1e-6, max_iterations = 1000,
    sign_cutoff = 1000, learning_rate = 1e-3, seed = None, strict = false))]
#[allow(clippy::too_many_arguments)]
fn run(
    whitened: Rows,
    algorithm: &str,
    tolerance: f64,
    max_iterations: usize,
    sign_cutoff: usize,
    learning_rate: f64,
    seed: Option<u64>,
    strict: bool,
) -> PyResult<IcaRun> {
    let config = config(algorithm, tolerance, max_iterations, 0.0, sign_cutoff, learning_rate, seed, strict)?;
    let result = ogica::pipeline::run_algorithm(&data(whitened)?, &config).map_err(to_py)?;
    Ok(IcaRun::new(result, None))
}

/// Center, whiten and unmix raw channel data.
#[pyfunction]
#[pyo3(signature = (data_rows, algorithm = "ogextinf", tolerance = 1e-6, max_iterations = 3000,
    pca_variance = 0.01, sign_cutoff = 1000, learning_rate = 1e-3, seed = None, strict = false))]
#[allow(clippy::too_many_arguments)]
fn decompose(
    data_rows: Rows,
    algorithm: &str,
    tolerance: f64,
    max_iterations: usize,
    pca_variance: f64,
    sign_cutoff: usize,
    learning_rate: f64,
    seed: Option<u64>,
    strict: bool,
) -> PyResult<(IcaRun, Whitening)> {
    let config = config(algorithm, tolerance, max_iterations, pca_variance, sign_cutoff, learning_rate, seed, strict)?;
    let Decomposition { whitening, result, composed } =
        ogica::pipeline::decompose(&data(data_rows)?, &config).map_err(to_py)?;
    Ok((IcaRun::new(result, Some(composed)), Whitening(whitening)))
}

/// One multiplicative update; returns the next unmixing matrix, signs and weight change.
#[pyfunction]
#[pyo3(signature = (unmixing, whitened, sign_cutoff = 1000))]
fn update_step(unmixing: Rows, whitened: Rows, sign_cutoff: usize) -> PyResult<(Rows, Vec<i8>, f64)> {
    let state = ogica::ogextinf::UnmixingState::new(matrix(unmixing)?);
    let next = ogica::ogextinf::update_step(&state, &matrix(whitened)?, sign_cutoff).map_err(to_py)?;
    Ok((to_rows(&next.unmixing), next.signs.iter().map(|&s| sign(s)).collect(), next.weight_change))
}

/// Nearest orthogonal matrix `U·Vᵀ`.
#[pyfunction]
fn symmetric_orthogonalize(m: Rows) -> PyResult<Rows> {
    ogica::ogextinf::symmetric_orthogonalize(&matrix(m)?).map(|w| to_rows(&w)).map_err(to_py)
}

/// Per-row nonlinearity signs: +1 super-Gaussian, −1 sub-Gaussian.
#[pyfunction]
#[pyo3(signature = (sources, sign_cutoff = 1000))]
fn select_signs(sources: Rows, sign_cutoff: usize) -> PyResult<Vec<i8>> {
    let signs = ogica::nonlinearity::select_signs(&matrix(sources)?, sign_cutoff).map_err(to_py)?;
    Ok(signs.iter().map(|&s| sign(s)).collect())
}

/// Amari distance of `unmixing · mixing` from a scaled permutation.
#[pyfunction]
fn amari_distance(unmixing: Rows, mixing: Rows) -> PyResult<f64> {
    ogica::metrics::amari_distance(&matrix(unmixing)?, &matrix(mixing)?).map_err(to_py)
}

#[pyfunction]
fn amari_index(global: Rows) -> PyResult<f64> {
    ogica::metrics::amari_index(&matrix(global)?).map_err(to_py)
}

/// Run the simulation benchmark for a preset and return the report as JSON text.
#[pyfunction]
#[pyo3(signature = (experiment, runs, seed = 0, algorithms = vec!["ogextinf".to_string(), "extinf".to_string()],
    max_iterations = 1000, tolerance = 1e-6, learning_rate = 1e-3, jobs = 1))]
#[allow(clippy::too_many_arguments)]
fn benchmark(
    py: Python<'_>,
    experiment: u8,
    runs: usize,
    seed: u64,
    algorithms: Vec<String>,
    max_iterations: usize,
    tolerance: f64,
    learning_rate: f64,
    jobs: usize,
) -> PyResult<String> {
    let mut spec = ExperimentSpec::preset(experiment, seed).map_err(to_py)?;
    spec.runs = runs;
    let mut config = BenchmarkConfig::new(spec);
    config.algorithms = algorithms.iter().map(|a| algorithm(a)).collect::<PyResult<_>>()?;
    config.max_iterations = max_iterations;
    config.tolerance = tolerance;
    config.learning_rate = learning_rate;
    config.jobs = jobs;
    let outcome = py.detach(|| run_benchmark(&config)).map_err(to_py)?;
    serde_json::to_string(&outcome.report).map_err(|e| OgicaError::new_err(e.to_string()))
}

#[pymodule]
fn pyogica(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("OgicaError", m.py().get_type::<OgicaError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<Dataset>()?;
    m.add_class::<Whitening>()?;
    m.add_class::<IcaRun>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(fit_whitening, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(update_step, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_orthogonalize, m)?)?;
    m.add_function(wrap_pyfunction!(select_signs, m)?)?;
    m.add_function(wrap_pyfunction!(amari_distance, m)?)?;
    m.add_function(wrap_pyfunction!(amari_index, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark, m)?)?;
    Ok(())
}
