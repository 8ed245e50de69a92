//! Degree covariance `Q` of the canonical ensemble and the spectral quantities
//! that control `log det Q`: the diagonal approximation, the Markov matrix
//! `A = Q_D^{-1} Q_off`, the Ipsen–Lee sandwich and Zhang's eigenvalue bound.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalModel;
use crate::error::{Error, Result};
use crate::graph::pairs;

/// `q_ij = p_ij (1 - p_ij)` off the diagonal, `q_ii = sum_{j != i} q_ij`.
pub fn covariance_matrix(model: &CanonicalModel) -> DMatrix<f64> {
    let n = model.n();
    let p = model.p();
    let mut q = DMatrix::zeros(n, n);
    for (i, j) in pairs(n) {
        let v = p[(i, j)] * (1.0 - p[(i, j)]);
        q[(i, j)] = v;
        q[(j, i)] = v;
    }
    for i in 0..n {
        q[(i, i)] = q.row(i).sum();
    }
    q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogDetMethod {
    Cholesky,
    Eigen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogDeterminants {
    pub logdet_q: f64,
    pub logdet_qd: f64,
    pub method: LogDetMethod,
    /// Eigenvalues raised to the clamp floor on the eigen path.
    pub clamped: usize,
}

/// `log det Q` by Cholesky, falling back to a symmetric eigendecomposition.
/// Eigenvalues below `-1e-9 n` are a hard failure.
pub fn log_determinants(q: &DMatrix<f64>) -> Result<LogDeterminants> {
    let n = q.nrows();
    let logdet_qd = diagonal_logdet(q)?;
    if let Some(chol) = q.clone().cholesky() {
        let logdet_q = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if logdet_q.is_finite() {
            return Ok(LogDeterminants {
                logdet_q,
                logdet_qd,
                method: LogDetMethod::Cholesky,
                clamped: 0,
            });
        }
    }
    let eig = sorted_eigenvalues(q);
    let tol = 1e-9 * n as f64;
    if let Some((index, &ev)) = eig.iter().enumerate().find(|(_, &v)| v < -tol || v == 0.0) {
        return Err(Error::NotPositiveDefinite { index, eigenvalue: ev });
    }
    let top = eig.last().copied().unwrap_or(1.0);
    let floor = f64::EPSILON * top * n as f64;
    let mut clamped = 0;
    let logdet_q = eig
        .iter()
        .map(|&v| {
            if v < floor {
                clamped += 1;
                floor.ln()
            } else {
                v.ln()
            }
        })
        .sum();
    Ok(LogDeterminants {
        logdet_q,
        logdet_qd,
        method: LogDetMethod::Eigen,
        clamped,
    })
}

fn diagonal_logdet(q: &DMatrix<f64>) -> Result<f64> {
    q.diagonal()
        .iter()
        .enumerate()
        .map(|(i, &v)| if v > 0.0 { Ok(v.ln()) } else { Err(Error::SingularDiagonal(i)) })
        .sum()
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `a_ij = q_ij / q_ii` for `i != j`, zero diagonal. Row-stochastic.
pub fn markov_matrix(q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = q.nrows();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let d = q[(i, i)];
        if d <= 0.0 {
            return Err(Error::SingularDiagonal(i));
        }
        for j in (0..n).filter(|&j| j != i) {
            a[(i, j)] = q[(i, j)] / d;
        }
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovSpectrum {
    /// Ascending.
    pub spectrum: Vec<f64>,
    pub rho: f64,
    pub lambda_min: f64,
    pub min_offdiag: f64,
}

/// Spectrum of `A = Q_D^{-1} Q_off`, computed through the similar symmetric
/// matrix `Q_D^{-1/2} Q_off Q_D^{-1/2}` so the eigenvalues come out real.
pub fn markov_spectrum(q: &DMatrix<f64>) -> Result<MarkovSpectrum> {
    let n = q.nrows();
    let a = markov_matrix(q)?;
    let inv_sqrt: Vec<f64> = q.diagonal().iter().map(|d| d.sqrt().recip()).collect();
    let mut s = DMatrix::zeros(n, n);
    for (i, j) in pairs(n) {
        let v = q[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        s[(i, j)] = v;
        s[(j, i)] = v;
    }
    let spectrum = sorted_eigenvalues(&s);
    let rho = spectrum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_offdiag = pairs(n)
        .flat_map(|(i, j)| [a[(i, j)], a[(j, i)]])
        .fold(f64::INFINITY, f64::min);
    Ok(MarkovSpectrum {
        lambda_min: spectrum.first().copied().unwrap_or(0.0),
        spectrum,
        rho,
        min_offdiag,
    })
}

/// Ipsen–Lee sandwich in log space:
/// `log det Q_D - n rho^2 / (1 + lambda_min) <= log det Q <= log det Q_D`.
pub fn ipsen_lee_bounds(logdet_qd: f64, spectrum: &MarkovSpectrum) -> Result<(f64, f64)> {
    let n = spectrum.spectrum.len() as f64;
    if spectrum.lambda_min <= -1.0 + 1e-12 {
        return Err(Error::BoundUndefined(spectrum.lambda_min));
    }
    let lower = logdet_qd - n * spectrum.rho.powi(2) / (1.0 + spectrum.lambda_min);
    Ok((lower, logdet_qd))
}

/// `lambda_min(A) >= -1 + (n - 2) min_{i != j} a_ij` (complete support, uniform
/// weights, no self-loops).
pub fn zhang_bound(spectrum: &MarkovSpectrum) -> f64 {
    let n = spectrum.spectrum.len() as f64;
    -1.0 + (n - 2.0) * spectrum.min_offdiag
}

/// Weaker form of [`zhang_bound`] through `a_ij >= (delta/(1-delta))^2 / (n-1)`.
pub fn zhang_bound_delta(n: usize, delta: f64) -> f64 {
    let n = n as f64;
    -1.0 + (n - 2.0) / (n - 1.0) * (delta / (1.0 - delta)).powi(2)
}

/// `#{i : lambda_i(Q) <= r}`.
pub fn eigenvalue_tail_count(eigenvalues: &[f64], r: f64) -> usize {
    eigenvalues.iter().filter(|&&v| v <= r).count()
}

/// Everything above, for one fitted model. `Q` itself is left out of the JSON
/// form; use [`matrix_to_csv`] for it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    #[serde(skip)]
    pub q: DMatrix<f64>,
    pub logdet_q: f64,
    pub logdet_qd: f64,
    pub logdet_method: LogDetMethod,
    pub clamped: usize,
    pub eigenvalues_q: Vec<f64>,
    pub a_spectrum: Vec<f64>,
    pub rho_a: f64,
    pub lambda_min_a: f64,
    pub min_a: f64,
    pub ipsen_lee_lower: f64,
    pub ipsen_lee_upper: f64,
    pub zhang_bound: f64,
    pub zhang_bound_delta: f64,
    pub delta_hat: f64,
}

impl CovarianceReport {
    pub fn tail_count(&self, r: f64) -> usize {
        eigenvalue_tail_count(&self.eigenvalues_q, r)
    }
}

pub fn covariance_report(model: &CanonicalModel) -> Result<CovarianceReport> {
    let q = covariance_matrix(model);
    let ld = log_determinants(&q)?;
    let ms = markov_spectrum(&q)?;
    let (lower, upper) = ipsen_lee_bounds(ld.logdet_qd, &ms)?;
    let delta_hat = model.delta_hat();
    Ok(CovarianceReport {
        eigenvalues_q: sorted_eigenvalues(&q),
        logdet_q: ld.logdet_q,
        logdet_qd: ld.logdet_qd,
        logdet_method: ld.method,
        clamped: ld.clamped,
        zhang_bound: zhang_bound(&ms),
        zhang_bound_delta: zhang_bound_delta(model.n(), delta_hat),
        a_spectrum: ms.spectrum,
        rho_a: ms.rho,
        lambda_min_a: ms.lambda_min,
        min_a: ms.min_offdiag,
        ipsen_lee_lower: lower,
        ipsen_lee_upper: upper,
        delta_hat,
        q,
    })
}

/// Dumps a matrix as CSV, one row per line, no header.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{fit, FitOptions};
    use crate::degrees::DegreeSequence;
    use approx::assert_abs_diff_eq;

    fn regular(n: usize, k: usize) -> CanonicalModel {
        fit(&DegreeSequence::new(vec![k; n]).unwrap(), &FitOptions::default()).unwrap()
    }

    #[test]
    fn regular_four_node_entries() {
        let q = covariance_matrix(&regular(4, 1));
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 2.0 / 3.0 } else { 2.0 / 9.0 };
                assert_abs_diff_eq!(q[(i, j)], expect, epsilon = 1e-10);
            }
        }
        let half = CanonicalModel::from_theta(vec![0.0; 4], None).unwrap();
        let q = covariance_matrix(&half);
        assert_eq!(q[(0, 1)], 0.25);
        assert_eq!(q[(2, 2)], 0.75);
    }

    #[test]
    fn regular_four_node_determinants() {
        let q = covariance_matrix(&regular(4, 1));
        let ld = log_determinants(&q).unwrap();
        assert_eq!(ld.method, LogDetMethod::Cholesky);
        assert_abs_diff_eq!(ld.logdet_q, (256.0f64 / 2187.0).ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(ld.logdet_qd, 4.0 * (2.0f64 / 3.0).ln(), epsilon = 1e-9);
        let ev = sorted_eigenvalues(&q);
        for (v, e) in ev.iter().zip([4.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0, 4.0 / 3.0]) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-9);
        }
        assert_eq!(eigenvalue_tail_count(&ev, 1.0), 3);
        assert_eq!(eigenvalue_tail_count(&ev, -1.0), 0);
        assert_eq!(eigenvalue_tail_count(&ev, 2.0), 4);
    }

    #[test]
    fn diagonal_matrix_determinants_coincide() {
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 3.0, 0.5]));
        let ld = log_determinants(&q).unwrap();
        assert_abs_diff_eq!(ld.logdet_q, ld.logdet_qd, epsilon = 1e-15);
        let ms = markov_spectrum(&q).unwrap();
        assert_eq!(ms.rho, 0.0);
        let (lo, hi) = ipsen_lee_bounds(ld.logdet_qd, &ms).unwrap();
        assert_eq!(lo, hi);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        match log_determinants(&q) {
            Err(Error::NotPositiveDefinite { eigenvalue, .. }) => assert_abs_diff_eq!(eigenvalue, -1.0, epsilon = 1e-12),
            other => panic!("expected failure, got {other:?}"),
        }
        let q = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(markov_spectrum(&q), Err(Error::SingularDiagonal(0))));
    }

    #[test]
    fn regular_markov_spectra() {
        for (n, k) in [(4usize, 1usize), (10, 5)] {
            let r = covariance_report(&regular(n, k)).unwrap();
            let lam = -1.0 / (n as f64 - 1.0);
            assert_abs_diff_eq!(r.a_spectrum[n - 1], 1.0, epsilon = 1e-9);
            for v in &r.a_spectrum[..n - 1] {
                assert_abs_diff_eq!(*v, lam, epsilon = 1e-9);
            }
            assert_abs_diff_eq!(r.rho_a, 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(r.zhang_bound, lam, epsilon = 1e-9);
        }
        let r = covariance_report(&regular(4, 1)).unwrap();
        assert_abs_diff_eq!(r.ipsen_lee_lower, -6.0 + (16.0f64 / 81.0).ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(r.ipsen_lee_lower, -7.622, epsilon = 1e-3);
        assert!(r.ipsen_lee_lower <= r.logdet_q && r.logdet_q <= r.ipsen_lee_upper);
    }

    #[test]
    fn markov_matrix_rows_sum_to_one() {
        let m = fit(&DegreeSequence::new(vec![1, 2, 2, 3, 3, 3]).unwrap(), &FitOptions::default()).unwrap();
        let a = markov_matrix(&covariance_matrix(&m)).unwrap();
        for i in 0..6 {
            assert_abs_diff_eq!(a.row(i).sum(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn csv_dump_shape() {
        let q = covariance_matrix(&regular(4, 1));
        let csv = matrix_to_csv(&q);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().all(|l| l.split(',').count() == 4));
    }
}
