//! Python bindings for `ensemble_gap`.
//!
//! Degree sequences cross the boundary as plain lists of ints; reports come back
//! as JSON strings so their layout matches the command-line output exactly.

use ensemble_gap::canonical::{canonical_log_probability, expected_degrees, max_entropy_check, FitOptions};
use ensemble_gap::covariance::{covariance_matrix, covariance_report};
use ensemble_gap::degrees::{realize, scale_parameter};
use ensemble_gap::distributions::degree_marginal;
use ensemble_gap::entropy::{
    entropy_report, relative_entropy_asymptotic, relative_entropy_exact, relative_entropy_sparse_approx,
    EntropyRequest,
};
use ensemble_gap::microcanonical::DEFAULT_CEILING;
use ensemble_gap::sampler::{empirical_report, sample_graph};
use ensemble_gap::verify::run_verification;
use ensemble_gap::{CanonicalModel, DegreeSequence, Error, Graph};
use num_bigint::BigUint;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyOverflowError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::NonConvergence { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::BoundUndefined(_)
        | Error::SingularDiagonal(_) => PyArithmeticError::new_err(msg),
        Error::TooLarge { .. } => PyOverflowError::new_err(msg),
        Error::Io(_) => PyOSError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn json<T: serde::Serialize>(schema: &str, value: &T) -> PyResult<String> {
    let v = ensemble_gap::io::with_schema(schema, value).map_err(to_py)?;
    Ok(v.to_string())
}

fn fit_domain(degrees: Vec<usize>) -> PyResult<DegreeSequence> {
    DegreeSequence::new(degrees).map_err(to_py)
}

fn options(tol: f64, max_iter: usize) -> FitOptions {
    FitOptions { tol, max_iter }
}

/// Fitted canonical (soft-constraint) model.
#[pyclass(name = "CanonicalModel", module = "ensemble_gap_py", frozen)]
struct PyModel {
    inner: CanonicalModel,
}

#[pymethods]
impl PyModel {
    /// Fit the multipliers so that expected degrees match `degrees`.
    #[staticmethod]
    #[pyo3(signature = (degrees, tol = 1e-10, max_iter = 200))]
    fn fit(degrees: Vec<usize>, tol: f64, max_iter: usize) -> PyResult<Self> {
        let d = fit_domain(degrees)?;
        let inner = ensemble_gap::fit(&d, &options(tol, max_iter)).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Model with the given multipliers and no target.
    #[staticmethod]
    fn from_theta(theta: Vec<f64>) -> PyResult<Self> {
        let inner = CanonicalModel::from_theta(theta, None).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn theta(&self) -> Vec<f64> {
        self.inner.theta().to_vec()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x().to_vec()
    }

    /// Fit residual, or NaN for a model built from multipliers.
    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations()
    }

    #[getter]
    fn delta_hat(&self) -> f64 {
        self.inner.delta_hat()
    }

    /// Edge probabilities as a list of rows.
    fn probabilities(&self) -> Vec<Vec<f64>> {
        rows(self.inner.p())
    }

    fn expected_degrees(&self) -> Vec<f64> {
        expected_degrees(&self.inner)
    }

    /// Degree covariance matrix Q as a list of rows.
    fn covariance(&self) -> Vec<Vec<f64>> {
        rows(&covariance_matrix(&self.inner))
    }

    fn covariance_report(&self) -> PyResult<String> {
        let r = covariance_report(&self.inner).map_err(to_py)?;
        json("ensemble-gap/covariance/v1", &r)
    }

    /// Log-probability of the graph with the given edge list.
    fn log_probability(&self, edges: Vec<(usize, usize)>) -> PyResult<f64> {
        let g = Graph::from_edges(self.inner.n(), &edges).map_err(to_py)?;
        canonical_log_probability(&self.inner, &g).map_err(to_py)
    }

    /// Probability mass function of node `i`'s degree.
    fn degree_pmf(&self, i: usize) -> PyResult<Vec<f64>> {
        Ok(degree_marginal(&self.inner, i).map_err(to_py)?.pmf)
    }

    /// `(log P_can(G*), H(p*), KKT residual)` at a realisation of the target.
    fn max_entropy_check(&self) -> PyResult<(f64, f64, f64)> {
        let target = self
            .inner
            .target()
            .ok_or_else(|| PyValueError::new_err("model has no target degree sequence"))?;
        let g = realize(target).ok_or_else(|| to_py(Error::NotGraphical))?;
        let r = max_entropy_check(&self.inner, &g).map_err(to_py)?;
        Ok((r.log_pcan_at_constraint, r.hamiltonian_value, r.kkt_residual))
    }

    /// Edge list of one graph drawn with the given seed.
    fn sample(&self, seed: u64) -> Vec<(usize, usize)> {
        sample_graph(&self.inner, seed).edges()
    }

    /// Mean degrees and empirical covariance over `num_samples` draws, as JSON.
    fn sample_report(&self, num_samples: usize, seed: u64) -> PyResult<String> {
        if num_samples < 2 {
            return Err(PyValueError::new_err("num_samples must be at least 2"));
        }
        json("ensemble-gap/sample/v1", &empirical_report(&self.inner, num_samples, seed))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_file()).map_err(|e| to_py(e.into()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file = serde_json::from_str(text).map_err(|e| to_py(e.into()))?;
        let inner = CanonicalModel::from_file(file).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "CanonicalModel(n={}, residual={:e}, iterations={})",
            self.inner.n(),
            self.inner.residual(),
            self.inner.iterations()
        )
    }
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// True iff some simple graph realises `degrees`.
#[pyfunction]
fn is_graphical(degrees: Vec<usize>) -> PyResult<bool> {
    let d = DegreeSequence::relaxed(degrees).map_err(to_py)?;
    Ok(ensemble_gap::is_graphical(&d))
}

/// `n - 1 - k_i` for every node.
#[pyfunction]
fn dual_sequence(degrees: Vec<usize>) -> PyResult<Vec<usize>> {
    let d = DegreeSequence::relaxed(degrees).map_err(to_py)?;
    Ok(ensemble_gap::dual_sequence(&d).degrees().to_vec())
}

/// Exact number of labelled simple graphs with these degrees.
#[pyfunction]
#[pyo3(signature = (degrees, ceiling = DEFAULT_CEILING))]
fn count_graphs(degrees: Vec<usize>, ceiling: usize) -> PyResult<BigUint> {
    let d = DegreeSequence::relaxed(degrees).map_err(to_py)?;
    Ok(ensemble_gap::count_graphs(&d, ceiling).map_err(to_py)?.omega)
}

#[pyfunction]
#[pyo3(signature = (degrees, tol = 1e-10, max_iter = 200, ceiling = DEFAULT_CEILING))]
fn relative_entropy(degrees: Vec<usize>, tol: f64, max_iter: usize, ceiling: usize) -> PyResult<f64> {
    relative_entropy_exact(&fit_domain(degrees)?, &options(tol, max_iter), ceiling).map_err(to_py)
}

/// `(1/2) log det(2 pi Q)` of the fitted model.
#[pyfunction]
#[pyo3(signature = (degrees, tol = 1e-10, max_iter = 200))]
fn relative_entropy_asymptotic_value(degrees: Vec<usize>, tol: f64, max_iter: usize) -> PyResult<f64> {
    let model = ensemble_gap::fit(&fit_domain(degrees)?, &options(tol, max_iter)).map_err(to_py)?;
    relative_entropy_asymptotic(&model).map_err(to_py)
}

/// `sum_i g(k_i)` with `g(k) = log(k! e^k / k^k)`.
#[pyfunction]
fn relative_entropy_sparse(degrees: Vec<usize>) -> PyResult<f64> {
    relative_entropy_sparse_approx(&fit_domain(degrees)?).map_err(to_py)
}

/// `n * mean_i (1/2) log[k_i (n-1-k_i) / n]`.
#[pyfunction]
fn scale(degrees: Vec<usize>) -> PyResult<f64> {
    Ok(scale_parameter(&fit_domain(degrees)?).map_err(to_py)?.alpha_n)
}

/// Full entropy report as JSON. The exact value is skipped above the ceiling.
#[pyfunction]
#[pyo3(signature = (degrees, tol = 1e-10, max_iter = 200, ceiling = DEFAULT_CEILING))]
fn entropy_report_json(degrees: Vec<usize>, tol: f64, max_iter: usize, ceiling: usize) -> PyResult<String> {
    let d = fit_domain(degrees)?;
    let request = EntropyRequest {
        exact: d.n() <= ceiling,
        ..EntropyRequest::ALL
    };
    let r = entropy_report(&d, &options(tol, max_iter), ceiling, request).map_err(to_py)?;
    serde_json::to_string(&r).map_err(|e| to_py(e.into()))
}

/// Invariant suite as JSON; check `all_passed`.
#[pyfunction]
#[pyo3(signature = (degrees, tol = 1e-10, max_iter = 200, ceiling = DEFAULT_CEILING))]
fn verify_json(degrees: Vec<usize>, tol: f64, max_iter: usize, ceiling: usize) -> PyResult<String> {
    let d = fit_domain(degrees)?;
    let r = run_verification(&d, &options(tol, max_iter), ceiling).map_err(to_py)?;
    serde_json::to_string(&r).map_err(|e| to_py(e.into()))
}

#[pymodule]
fn ensemble_gap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(is_graphical, m)?)?;
    m.add_function(wrap_pyfunction!(dual_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(count_graphs, m)?)?;
    m.add_function(wrap_pyfunction!(relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(relative_entropy_asymptotic_value, m)?)?;
    m.add_function(wrap_pyfunction!(relative_entropy_sparse, m)?)?;
    m.add_function(wrap_pyfunction!(scale, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_report_json, m)?)?;
    m.add_function(wrap_pyfunction!(verify_json, m)?)?;
    m.add("DEFAULT_CEILING", DEFAULT_CEILING)?;
    Ok(())
}
