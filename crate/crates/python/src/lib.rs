//! Python module `specreg`: filters, kernels, the spectral estimator, the
//! spectrum model and the simulation runner.

use ndarray::Array2;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use specreg::estimator::{self, FittedEstimator};
use specreg::filters::{self, FilterFamily, FilterKind};
use specreg::kernels::{KernelChoice, KernelSpec, PrecomputedKernel, Points};
use specreg::simlab::{self, ExperimentConfig, SyntheticTask, Target};
use specreg::spectral;
use specreg::spectrum::SpectrumModel;

fn py_err(e: specreg::Error) -> PyErr {
    match e {
        specreg::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err("rows must all have the same length"));
    }
    Array2::from_shape_vec((nrows, ncols), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn from_matrix(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// A spectral filter family: `ridge`, `cutoff` or `landweber`.
#[pyclass(name = "Filter", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFilter {
    inner: FilterFamily,
}

#[pymethods]
impl PyFilter {
    #[new]
    #[pyo3(signature = (kind, kappa_sq = 1.0, step = None))]
    fn new(kind: &str, kappa_sq: f64, step: Option<f64>) -> PyResult<Self> {
        let inner = match (kind, step) {
            ("ridge", None) => FilterFamily::ridge(kappa_sq),
            ("cutoff", None) => FilterFamily::cutoff(kappa_sq),
            ("landweber", None) => FilterFamily::landweber(kappa_sq),
            ("landweber", Some(s)) => FilterFamily::landweber_with_step(kappa_sq, s),
            (_, Some(_)) => return Err(PyValueError::new_err("step applies to landweber only")),
            (other, None) => return Err(PyValueError::new_err(format!("unknown filter {other:?}"))),
        }
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    /// `krr`, `kpcr` or `landweber`.
    #[getter]
    fn label(&self) -> &'static str {
        self.inner.label()
    }

    #[getter]
    fn kappa_sq(&self) -> f64 {
        self.inner.kappa_sq()
    }

    /// `g_λ(t)`.
    fn weight(&self, lam: f64, t: f64) -> PyResult<f64> {
        self.inner.evaluate(lam, t).map_err(py_err)
    }

    /// `1 − t g_λ(t)`.
    fn residual(&self, lam: f64, t: f64) -> PyResult<f64> {
        self.inner.residual(lam, t).map_err(py_err)
    }

    /// Checks the three structural conditions on a grid; returns a dict of booleans.
    fn verify<'py>(&self, py: Python<'py>, lambdas: Vec<f64>, ts: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let r = filters::verify_family_conditions(&self.inner, &lambdas, &ts).map_err(py_err)?;
        let d = PyDict::new(py);
        for (name, c) in [("r1", r.r1), ("r2", r.r2), ("r3", r.r3)] {
            d.set_item(name, c.weak)?;
            d.set_item(format!("{name}_strict"), c.strict)?;
        }
        Ok(d)
    }

    /// Smallest constant `C` with `sup_t |1 − t g_λ(t)| t^ξ ≤ C λ^ξ` on the grid.
    fn qualification_constant(&self, xi: f64, lambdas: Vec<f64>, ts: Vec<f64>) -> PyResult<f64> {
        filters::empirical_qualification(&self.inner, xi, &lambdas, &ts, 1.0)
            .map(|q| q.ratio)
            .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Filter({:?}, kappa_sq={})", self.inner.label(), self.inner.kappa_sq())
    }
}

/// A reproducing kernel. Points are ints for `discrete`, row vectors for
/// `gaussian` and `linear`, and zero-based indices for `precomputed`.
#[pyclass(name = "Kernel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyKernel {
    inner: KernelSpec,
}

impl PyKernel {
    fn points(&self, obj: &Bound<'_, PyAny>) -> PyResult<Points> {
        Ok(match self.inner {
            KernelSpec::Discrete => Points::Discrete(obj.extract()?),
            KernelSpec::Precomputed(_) => Points::Indices(obj.extract()?),
            KernelSpec::Gaussian { .. } | KernelSpec::Linear => Points::Vectors(to_matrix(obj.extract()?)?),
        })
    }
}

#[pymethods]
impl PyKernel {
    #[staticmethod]
    fn discrete() -> Self {
        Self {
            inner: KernelChoice::Discrete.into(),
        }
    }

    #[staticmethod]
    fn gaussian(bandwidth: f64) -> PyResult<Self> {
        Ok(Self {
            inner: KernelSpec::gaussian(bandwidth).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn linear() -> Self {
        Self {
            inner: KernelChoice::Linear.into(),
        }
    }

    #[staticmethod]
    fn precomputed(matrix: Vec<Vec<f64>>) -> PyResult<Self> {
        let k = PrecomputedKernel::new(to_matrix(matrix)?).map_err(py_err)?;
        Ok(Self {
            inner: KernelSpec::Precomputed(k),
        })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    /// Gram matrix of `points`.
    fn matrix(&self, points: &Bound<'_, PyAny>) -> PyResult<Vec<Vec<f64>>> {
        let p = self.points(points)?;
        Ok(from_matrix(&specreg::kernels::kernel_matrix(&self.inner, &p).map_err(py_err)?))
    }

    /// `sup K(x, x)` over `points`.
    fn kappa_sq(&self, points: &Bound<'_, PyAny>) -> PyResult<f64> {
        let p = self.points(points)?;
        self.inner.kappa_sq(&p).map_err(py_err)
    }
}

/// A fitted spectral estimator `f̂ = Σ_i γ_i K(x_i, ·)`.
#[pyclass(name = "Estimator", frozen)]
struct PyEstimator {
    inner: FittedEstimator,
    kernel: PyKernel,
}

#[pymethods]
impl PyEstimator {
    #[getter]
    fn dual_coefficients(&self) -> Vec<f64> {
        self.inner.dual_coefficients().to_vec()
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda()
    }

    fn predict(&self, points: &Bound<'_, PyAny>) -> PyResult<Vec<f64>> {
        let p = self.kernel.points(points)?;
        self.inner.predict(&p).map_err(py_err)
    }
}

/// Fits the spectral estimator with filter `filter` at regularization `lam`.
#[pyfunction]
fn fit(kernel: &PyKernel, points: &Bound<'_, PyAny>, y: Vec<f64>, filter: &PyFilter, lam: f64) -> PyResult<PyEstimator> {
    let p = kernel.points(points)?;
    let inner = estimator::fit(&p, &y, &kernel.inner, &filter.inner, lam).map_err(py_err)?;
    Ok(PyEstimator {
        inner,
        kernel: kernel.clone(),
    })
}

/// Eigenvalues (descending) and eigenvectors (columns) of a symmetric matrix.
#[pyfunction]
fn eigh(matrix: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = to_matrix(matrix)?;
    let s = spectral::eigh_symmetric(m.view()).map_err(py_err)?;
    Ok((s.eigenvalues().to_vec(), from_matrix(s.eigenvectors())))
}

/// Integral-operator spectrum of the discrete kernel under `μ(x) ∝ x^{−a}`.
#[pyclass(name = "SpectrumModel", frozen)]
struct PySpectrumModel {
    inner: SpectrumModel,
}

#[pymethods]
impl PySpectrumModel {
    #[staticmethod]
    fn marginal_power(domain_size: usize, exponent: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SpectrumModel::marginal_power(domain_size, exponent).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn explicit(eigenvalues: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: SpectrumModel::explicit(eigenvalues).map_err(py_err)?,
        })
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    /// `Σ_j t_j² / (t_j² + λ)`.
    fn effective_dimension(&self, lam: f64) -> PyResult<f64> {
        self.inner.effective_dimension(lam).map_err(py_err)
    }
}

/// Runs the validation-tuned simulation; returns one dict per method.
#[pyfunction]
#[pyo3(signature = (
    domain_size, n, lambdas, marginal_exponent = 0.5, sigma_sq = 0.25, indicators = 5,
    filters = vec!["ridge".to_string(), "cutoff".to_string()], replicates = 5, seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    domain_size: usize,
    n: usize,
    lambdas: Vec<f64>,
    marginal_exponent: f64,
    sigma_sq: f64,
    indicators: usize,
    filters: Vec<String>,
    replicates: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let kinds = filters
        .iter()
        .map(|f| match f.as_str() {
            "ridge" => Ok(FilterKind::Ridge),
            "cutoff" => Ok(FilterKind::Cutoff),
            other => Err(PyValueError::new_err(format!("unknown filter {other:?}"))),
        })
        .collect::<PyResult<Vec<_>>>()?;
    let config = ExperimentConfig {
        task: SyntheticTask {
            domain_size,
            marginal_exponent,
            target: Target::Indicators { count: indicators },
            noise_sd: sigma_sq.sqrt(),
            master_seed: seed,
        },
        n,
        n_validation: None,
        kernel: KernelChoice::Discrete,
        filters: kinds,
        lambdas,
        replicates,
        force_dense: false,
    };
    let report = py.detach(|| simlab::run_experiment(&config)).map_err(py_err)?;
    report
        .summaries
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("method", &s.method)?;
            d.set_item("median_mu_mse", s.mu_mse.median)?;
            d.set_item("mean_mu_mse", s.mu_mse.mean)?;
            d.set_item("median_lambda", s.lambda_selected.median)?;
            d.set_item("median_bias_part", s.bias_part.median)?;
            d.set_item("median_variance_part", s.variance_part.median)?;
            Ok(d)
        })
        .collect()
}

/// Least-squares slope of `log risk` against `log n`.
#[pyfunction]
fn estimate_rate(points: Vec<(f64, f64)>) -> PyResult<f64> {
    simlab::estimate_rate(&points).map_err(py_err)
}

#[pymodule]
#[pyo3(name = "specreg")]
fn specreg_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFilter>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyEstimator>()?;
    m.add_class::<PySpectrumModel>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(eigh, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_rate, m)?)?;
    Ok(())
}
