//! Python bindings. The extension module is named `rapid_dim`.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use ::rapid_dim::experiment::{parse_args, run};
use ::rapid_dim::path::{BitCode, DyadicPath, GridPath};
use ::rapid_dim::rapid::RapidQuery;
use ::rapid_dim::{bounds, complexity, dimension, path, rapid, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Sample path on the dyadic grid `k 2^-N`, `k = 0..=2^N`.
#[pyclass(name = "Path", module = "rapid_dim", frozen)]
struct PyPath(DyadicPath);

#[pymethods]
impl PyPath {
    #[new]
    fn new(resolution: u32, values: Vec<f64>) -> PyResult<Self> {
        DyadicPath::from_values(resolution, values).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn brownian(py: Python<'_>, resolution: u32, seed: u64) -> PyResult<Self> {
        py.detach(|| path::generate_brownian(resolution, seed)).map(Self).map_err(py_err)
    }

    /// Decoded screened random sign code of length `2^resolution`.
    #[staticmethod]
    #[pyo3(signature = (resolution, seed, budget = complexity::DEFAULT_DEFICIENCY_BUDGET))]
    fn oscillation(py: Python<'_>, resolution: u32, seed: u64, budget: u64) -> PyResult<Self> {
        py.detach(|| complexity::oscillation_path(resolution, seed, budget))
            .map(|(p, _)| Self(p))
            .map_err(py_err)
    }

    #[getter]
    fn resolution(&self) -> u32 {
        self.0.resolution_exponent()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.values().len()
    }

    fn scaled(&self, factor: f64) -> PyResult<Self> {
        self.0.scaled(factor).map(Self).map_err(py_err)
    }

    fn time_reversed(&self) -> Self {
        Self(self.0.time_reversed())
    }

    #[pyo3(signature = (alpha, n, j = 2, from_left = false))]
    fn count_rapid(&self, py: Python<'_>, alpha: f64, n: u32, j: u32, from_left: bool) -> PyResult<RapidCount> {
        let mut query = RapidQuery::new(alpha, n, j).map_err(py_err)?;
        if from_left {
            query = query.from_left();
        }
        let rec = py.detach(|| rapid::count_rapid_intervals(&self.0, &query)).map_err(py_err)?;
        Ok(RapidCount { alpha, n, j, count: rec.count, cells: rec.rapid_cells, threshold: rec.threshold })
    }

    #[pyo3(signature = (alpha, n_min, n_max, j = 2))]
    fn estimate_dimension(&self, py: Python<'_>, alpha: f64, n_min: u32, n_max: u32, j: u32) -> PyResult<ExponentFit> {
        let est = py
            .detach(|| dimension::estimate_dimension(&self.0, alpha, n_min, n_max, j))
            .map_err(py_err)?;
        let f = est.fit;
        Ok(ExponentFit {
            suspicious: f.is_suspicious(),
            slope: f.slope,
            intercept: f.intercept,
            residual_rms: f.residual_rms,
            points: f.points,
            dropped_scales: f.dropped_scales,
        })
    }

    fn __repr__(&self) -> String {
        format!("Path(resolution={}, x1={})", self.0.resolution_exponent(), self.0.values()[self.0.steps()])
    }
}

#[pyclass(module = "rapid_dim", frozen, get_all)]
struct RapidCount {
    alpha: f64,
    n: u32,
    j: u32,
    count: u64,
    cells: Vec<u64>,
    threshold: f64,
}

#[pymethods]
impl RapidCount {
    fn __repr__(&self) -> String {
        format!("RapidCount(alpha={}, n={}, j={}, count={})", self.alpha, self.n, self.j, self.count)
    }
}

#[pyclass(module = "rapid_dim", frozen, get_all)]
struct ExponentFit {
    slope: f64,
    intercept: f64,
    residual_rms: f64,
    points: Vec<(u32, f64)>,
    dropped_scales: Vec<u32>,
    suspicious: bool,
}

#[pymethods]
impl ExponentFit {
    fn __repr__(&self) -> String {
        format!("ExponentFit(slope={:.4}, residual_rms={:.4})", self.slope, self.residual_rms)
    }
}

#[pyclass(module = "rapid_dim", frozen, get_all)]
struct ComplexityReport {
    length: usize,
    compressed_bits: u64,
    ratio: f64,
    passes: bool,
    vacuous: bool,
}

fn code(bits: Vec<i8>) -> PyResult<BitCode> {
    BitCode::new(bits).map_err(py_err)
}

/// Piecewise-linear path of a `+1/-1` code, `samples_per_cell` grid steps per bit.
#[pyfunction]
#[pyo3(signature = (bits, samples_per_cell = 1))]
fn decode(bits: Vec<i8>, samples_per_cell: usize) -> PyResult<Vec<f64>> {
    path::decode(&code(bits)?, samples_per_cell).map(GridPath::into_values).map_err(py_err)
}

/// Sign of the increment over each of `n` equal cells; ties give `-1`.
#[pyfunction]
fn encode(values: Vec<f64>, n: usize) -> PyResult<Vec<i8>> {
    let grid = GridPath::new(values).map_err(py_err)?;
    path::encode(&grid, n).map(|c| c.bits().to_vec()).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (bits, budget = complexity::DEFAULT_DEFICIENCY_BUDGET))]
fn screen_code(bits: Vec<i8>, budget: u64) -> PyResult<ComplexityReport> {
    let r = complexity::screen_code(&code(bits)?, budget);
    Ok(ComplexityReport {
        length: r.length,
        compressed_bits: r.compressed_length,
        ratio: r.ratio,
        passes: r.passes,
        vacuous: r.status == complexity::ScreenStatus::Vacuous,
    })
}

fn binomial(m: u64, p: f64, r: f64) -> PyResult<bounds::BinomialTailQuery> {
    bounds::BinomialTailQuery::new(m, p, r).map_err(py_err)
}

#[pyfunction]
fn feller_upper_bound(m: u64, p: f64, r: f64) -> PyResult<f64> {
    bounds::feller_upper_bound(&binomial(m, p, r)?).map_err(py_err)
}

#[pyfunction]
fn exact_binomial_tail(m: u64, p: f64, r: f64) -> PyResult<f64> {
    bounds::exact_binomial_tail(&binomial(m, p, r)?).map_err(py_err)
}

#[pyfunction]
fn gaussian_upper_tail(y: f64) -> f64 {
    bounds::gaussian_upper_tail(y)
}

#[pyfunction]
fn gaussian_tail_lower_bound(y: f64) -> PyResult<f64> {
    bounds::gaussian_tail_lower_bound(y).map_err(py_err)
}

#[pyfunction]
fn gaussian_tail_upper_bound(y: f64) -> PyResult<f64> {
    bounds::gaussian_tail_upper_bound(y).map_err(py_err)
}

#[pyfunction]
fn reflection_tail(b: f64) -> PyResult<f64> {
    bounds::reflection_tail(b).map_err(py_err)
}

#[pyfunction]
fn rapid_probability_lower_bound(alpha: f64, n: u32) -> PyResult<f64> {
    bounds::rapid_probability_lower_bound(alpha, n).map_err(py_err)
}

/// Runs the command-line experiment with `args` (without the program name). Returns
/// `(results_path, manifest_path, rows, failures)`.
#[pyfunction]
fn run_experiment(py: Python<'_>, args: Vec<String>) -> PyResult<(String, String, usize, usize)> {
    let argv = std::iter::once("rapid-dim".to_string()).chain(args);
    let parsed = parse_args(argv).map_err(py_err)?;
    let report = py.detach(|| run(&parsed.config, parsed.source)).map_err(py_err)?;
    Ok((
        report.results_path.display().to_string(),
        report.manifest_path.display().to_string(),
        report.manifest.rows,
        report.manifest.failures,
    ))
}

#[pymodule(name = "rapid_dim")]
pub fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPath>()?;
    m.add_class::<RapidCount>()?;
    m.add_class::<ExponentFit>()?;
    m.add_class::<ComplexityReport>()?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(screen_code, m)?)?;
    m.add_function(wrap_pyfunction!(feller_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(exact_binomial_tail, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_upper_tail, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_tail_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_tail_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(reflection_tail, m)?)?;
    m.add_function(wrap_pyfunction!(rapid_probability_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
