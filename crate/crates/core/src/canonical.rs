//! The canonical ensemble under a soft degree-sequence constraint.
//!
//! Edges are independent with `p_ij = x_i x_j / (1 + x_i x_j)`, `x_i = e^{-theta_i}`,
//! and the multipliers are tuned so that `sum_{j != i} p_ij = k_i`. The fit is a
//! damped Newton iteration on the convex negative log-likelihood
//!
//! ```text
//! L(theta) = sum_i theta_i k_i + sum_{i<j} log(1 + e^{-theta_i - theta_j})
//! ```
//!
//! whose gradient is `k - <k>` and whose Hessian is the degree covariance `Q`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::degrees::{is_graphical, DegreeSequence};
use crate::error::{Error, Result};
use crate::graph::{pairs, Graph};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

const ARMIJO_C: f64 = 1e-4;
const POLISH_STEPS: usize = 3;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Bound on `max_i |<k_i> - k_i|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `1 / (1 + e^z)`.
fn logistic_neg(z: f64) -> f64 {
    if z >= 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// A fitted (or explicitly parametrised) canonical model.
#[derive(Debug, Clone)]
pub struct CanonicalModel {
    target: Option<DegreeSequence>,
    theta: Vec<f64>,
    x: Vec<f64>,
    p: DMatrix<f64>,
    residual: f64,
    iterations: usize,
}

impl CanonicalModel {
    /// Wraps raw multipliers. Without a target the residual is `NaN`.
    pub fn from_theta(theta: Vec<f64>, target: Option<DegreeSequence>) -> Result<Self> {
        if let Some(t) = &target {
            if t.n() != theta.len() {
                return Err(Error::SizeMismatch {
                    expected: theta.len(),
                    got: t.n(),
                });
            }
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("non-finite multiplier".into()));
        }
        let p = edge_probabilities(&theta);
        let residual = match &target {
            Some(t) => max_residual(&p, t.degrees()),
            None => f64::NAN,
        };
        Ok(Self {
            target,
            x: theta.iter().map(|t| (-t).exp()).collect(),
            theta,
            p,
            residual,
            iterations: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn target(&self) -> Option<&DegreeSequence> {
        self.target.as_ref()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Symmetric edge-probability matrix, zero on the diagonal.
    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `log p_ij`.
    pub fn log_p(&self, i: usize, j: usize) -> f64 {
        -softplus(self.theta[i] + self.theta[j])
    }

    /// `log (1 - p_ij)`.
    pub fn log_1mp(&self, i: usize, j: usize) -> f64 {
        -softplus(-(self.theta[i] + self.theta[j]))
    }

    /// `log Z(theta) = sum_{i<j} log(1 + x_i x_j)`.
    pub fn log_partition(&self) -> f64 {
        -pairs(self.n()).map(|(i, j)| self.log_1mp(i, j)).sum::<f64>()
    }

    /// `min_{i != j} min(p_ij, 1 - p_ij)`.
    pub fn delta_hat(&self) -> f64 {
        pairs(self.n())
            .map(|(i, j)| {
                let p = self.p[(i, j)];
                p.min(1.0 - p)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            schema: MODEL_SCHEMA.to_string(),
            n: self.n(),
            theta: self.theta.clone(),
            residual: self.residual.is_finite().then_some(self.residual),
            iterations: self.iterations,
            degrees: self.target.as_ref().map(|t| t.degrees().to_vec()),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.theta.len() != file.n {
            return Err(Error::SizeMismatch {
                expected: file.n,
                got: file.theta.len(),
            });
        }
        let target = file.degrees.map(DegreeSequence::relaxed).transpose()?;
        let mut model = Self::from_theta(file.theta, target)?;
        model.iterations = file.iterations;
        Ok(model)
    }
}

pub const MODEL_SCHEMA: &str = "ensemble-gap/model/v1";

/// On-disk model. Edge probabilities are recomputed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    #[serde(default = "default_model_schema")]
    pub schema: String,
    pub n: usize,
    pub theta: Vec<f64>,
    pub residual: Option<f64>,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<usize>>,
}

fn default_model_schema() -> String {
    MODEL_SCHEMA.to_string()
}

fn edge_probabilities(theta: &[f64]) -> DMatrix<f64> {
    let n = theta.len();
    let mut p = DMatrix::zeros(n, n);
    for (i, j) in pairs(n) {
        let v = logistic_neg(theta[i] + theta[j]);
        p[(i, j)] = v;
        p[(j, i)] = v;
    }
    p
}

fn max_residual(p: &DMatrix<f64>, k: &[usize]) -> f64 {
    k.iter()
        .enumerate()
        .map(|(i, &ki)| (p.row(i).sum() - ki as f64).abs())
        .fold(0.0, f64::max)
}

fn objective(theta: &[f64], k: &[f64]) -> f64 {
    let linear: f64 = theta.iter().zip(k).map(|(t, k)| t * k).sum();
    let log_z: f64 = pairs(theta.len())
        .map(|(i, j)| softplus(-(theta[i] + theta[j])))
        .sum();
    linear + log_z
}

/// Residual vector `<k> - k` and covariance `Q` at `theta`.
fn residual_and_hessian(theta: &[f64], k: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let n = theta.len();
    let mut r = DVector::from_iterator(n, k.iter().map(|k| -k));
    let mut q = DMatrix::zeros(n, n);
    for (i, j) in pairs(n) {
        let p = logistic_neg(theta[i] + theta[j]);
        let v = p * (1.0 - p);
        r[i] += p;
        r[j] += p;
        q[(i, j)] = v;
        q[(j, i)] = v;
        q[(i, i)] += v;
        q[(j, j)] += v;
    }
    (r, q)
}

fn residual_norm(theta: &[f64], k: &[f64]) -> f64 {
    let n = theta.len();
    let mut r: Vec<f64> = k.iter().map(|k| -k).collect();
    for (i, j) in pairs(n) {
        let p = logistic_neg(theta[i] + theta[j]);
        r[i] += p;
        r[j] += p;
    }
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// One sweep of `x_i <- k_i / sum_{j != i} x_j / (1 + x_i x_j)`.
fn fixed_point_sweep(theta: &[f64], k: &[f64]) -> Vec<f64> {
    let n = theta.len();
    let x: Vec<f64> = theta.iter().map(|t| (-t).exp()).collect();
    (0..n)
        .map(|i| {
            let denom: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| x[j] / (1.0 + x[i] * x[j]))
                .sum();
            -(k[i] / denom).ln()
        })
        .collect()
}

/// Fits the multipliers for a graphical sequence with degrees in `{1, ..., n-2}`.
pub fn fit(d: &DegreeSequence, opts: &FitOptions) -> Result<CanonicalModel> {
    d.check_fit_domain()?;
    if !is_graphical(d) {
        return Err(Error::NotGraphical);
    }
    let k: Vec<f64> = d.degrees().iter().map(|&k| k as f64).collect();
    let scale = k.iter().sum::<f64>().sqrt();
    let mut theta: Vec<f64> = k.iter().map(|k| -(k / scale).ln()).collect();

    let mut res = f64::INFINITY;
    for iter in 0..=opts.max_iter {
        let (r, q) = residual_and_hessian(&theta, &k);
        res = r.amax();
        if res <= opts.tol {
            let (theta, res) = polish(theta, &k, r, q, res);
            let p = edge_probabilities(&theta);
            return Ok(CanonicalModel {
                target: Some(d.clone()),
                x: theta.iter().map(|t| (-t).exp()).collect(),
                theta,
                p,
                residual: res,
                iterations: iter,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        theta = newton_step(&theta, &k, &r, q, res).unwrap_or_else(|| {
            log::debug!("newton step rejected at iteration {iter}; fixed-point sweep");
            fixed_point_sweep(&theta, &k)
        });
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residual: res,
    })
}

/// A few undamped Newton steps past the tolerance, kept only while the residual
/// keeps shrinking. Near the root the multipliers are far more sensitive than
/// the degree residual, so this buys several digits in `theta` for free.
fn polish(mut theta: Vec<f64>, k: &[f64], mut r: DVector<f64>, mut q: DMatrix<f64>, mut res: f64) -> (Vec<f64>, f64) {
    for _ in 0..POLISH_STEPS {
        let Some(delta) = q.cholesky().map(|c| c.solve(&r)) else { break };
        let cand: Vec<f64> = theta.iter().zip(delta.iter()).map(|(a, d)| a + d).collect();
        let (rc, qc) = residual_and_hessian(&cand, k);
        let rc_norm = rc.amax();
        // NaN compares false, so it stops the polish too.
        if rc_norm.partial_cmp(&res) != Some(std::cmp::Ordering::Less) {
            break;
        }
        (theta, r, q, res) = (cand, rc, qc, rc_norm);
    }
    (theta, res)
}

/// Backtracking Newton step; `None` when no step length reduces either the
/// objective (Armijo) or the residual.
fn newton_step(
    theta: &[f64],
    k: &[f64],
    r: &DVector<f64>,
    q: DMatrix<f64>,
    res: f64,
) -> Option<Vec<f64>> {
    let delta = q.cholesky()?.solve(r);
    let f0 = objective(theta, k);
    let slope = -r.dot(&delta);
    let mut t = 1.0;
    for _ in 0..MAX_HALVINGS {
        let cand: Vec<f64> = theta.iter().zip(delta.iter()).map(|(a, d)| a + t * d).collect();
        if cand.iter().all(|v| v.is_finite()) {
            let armijo = objective(&cand, k) <= f0 + ARMIJO_C * t * slope;
            if armijo || residual_norm(&cand, k) < res {
                return Some(cand);
            }
        }
        t *= 0.5;
    }
    None
}

/// `(sum_{j != i} p_ij)_i`.
pub fn expected_degrees(model: &CanonicalModel) -> Vec<f64> {
    (0..model.n()).map(|i| model.p.row(i).sum()).collect()
}

fn check_size(model: &CanonicalModel, g: &Graph) -> Result<()> {
    if g.n() != model.n() {
        return Err(Error::SizeMismatch {
            expected: model.n(),
            got: g.n(),
        });
    }
    Ok(())
}

/// `sum_{i<j} [g_ij log p_ij + (1 - g_ij) log(1 - p_ij)]`.
pub fn canonical_log_probability(model: &CanonicalModel, g: &Graph) -> Result<f64> {
    check_size(model, g)?;
    Ok(pairs(model.n())
        .map(|(i, j)| {
            if g.has_edge(i, j) {
                model.log_p(i, j)
            } else {
                model.log_1mp(i, j)
            }
        })
        .sum())
}

/// The same probability in the `x` parametrisation, which depends on the graph
/// only through its degrees: `sum_i k_i log x_i - sum_{i<j} log(1 + x_i x_j)`.
pub fn canonical_log_probability_at_degrees(model: &CanonicalModel, degrees: &[usize]) -> Result<f64> {
    if degrees.len() != model.n() {
        return Err(Error::SizeMismatch {
            expected: model.n(),
            got: degrees.len(),
        });
    }
    let linear: f64 = model
        .theta
        .iter()
        .zip(degrees)
        .map(|(t, &k)| -t * k as f64)
        .sum();
    Ok(linear - model.log_partition())
}

/// Maximum-entropy characterisation of `p*` evaluated at a realising graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxEntropyReport {
    /// `E(p) = -sum_{i != j} [p log p + (1-p) log(1-p)]` over ordered pairs.
    pub entropy_value: f64,
    /// `H(p*)` in the identity `log P_can(G*) = -H(p*)`: the Shannon entropy of
    /// the canonical law, i.e. the sum over unordered pairs, `E(p*) / 2`.
    pub hamiltonian_value: f64,
    pub log_pcan_at_constraint: f64,
    /// `theta* . k*`; equals `hamiltonian_value - log Z(theta*)`.
    pub theta_dot_k: f64,
    pub log_partition: f64,
    pub constraint_residual: f64,
    pub stationarity_residual: f64,
    /// Max of the constraint and stationarity residuals of the entropy
    /// maximisation problem at `p*`.
    pub kkt_residual: f64,
}

pub fn max_entropy_check(model: &CanonicalModel, g_star: &Graph) -> Result<MaxEntropyReport> {
    let target = model.target().ok_or(Error::NoTarget)?;
    check_size(model, g_star)?;
    if g_star.degrees() != target.degrees() {
        return Err(Error::DegreeMismatch);
    }
    let n = model.n();
    let mut pair_entropy = 0.0;
    let mut stationarity: f64 = 0.0;
    for (i, j) in pairs(n) {
        let p = model.p[(i, j)];
        let (lp, lq) = (model.log_p(i, j), model.log_1mp(i, j));
        pair_entropy -= p * lp + (1.0 - p) * lq;
        // d/dq [q log q + (1-q) log(1-q)] balanced by the multipliers of rows i and j.
        stationarity = stationarity.max((lq - lp - model.theta[i] - model.theta[j]).abs());
    }
    let log_pcan = canonical_log_probability(model, g_star)?;
    let theta_dot_k: f64 = model
        .theta
        .iter()
        .zip(target.degrees())
        .map(|(t, &k)| t * k as f64)
        .sum();
    let constraint = max_residual(&model.p, target.degrees());
    Ok(MaxEntropyReport {
        entropy_value: 2.0 * pair_entropy,
        hamiltonian_value: pair_entropy,
        log_pcan_at_constraint: log_pcan,
        theta_dot_k,
        log_partition: model.log_partition(),
        constraint_residual: constraint,
        stationarity_residual: stationarity,
        kkt_residual: constraint.max(stationarity),
    })
}
