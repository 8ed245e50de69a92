//! Relative entropy `S_n(P_mic | P_can)` between the microcanonical and the
//! canonical ensemble: exact (by counting), asymptotic (`½ log det 2πQ`) and
//! the sparse per-node approximation `sum_i g(k_i)`.

use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_log_probability, fit, CanonicalModel, FitOptions};
use crate::covariance::{covariance_matrix, log_determinants};
use crate::degrees::{dual_sequence, realize, scale_parameter, DegreeSequence, ScaleReport};
use crate::distributions::{joint_pb_log_at_constraint, kl_dirac_poisson};
use crate::error::{Error, Result};
use crate::microcanonical::{count_graphs, GraphCount};

pub const REPORT_SCHEMA: &str = "ensemble-gap/entropy/v1";

/// Tolerance between the two exact routes (count-based and log-ratio).
const ROUTE_AGREEMENT: f64 = 1e-10;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Exact relative entropy together with its ingredients.
#[derive(Debug, Clone)]
pub struct ExactEntropy {
    /// `-log[Omega P_can(G*)]`.
    pub value: f64,
    /// `log P_mic(G*) - log P_can(G*)` through an explicit realisation `G*`.
    pub log_ratio: f64,
    pub omega: GraphCount,
    pub model: CanonicalModel,
}

/// Fits the model, counts `Omega` and evaluates the relative entropy twice.
pub fn exact_breakdown(d: &DegreeSequence, opts: &FitOptions, ceiling: usize) -> Result<ExactEntropy> {
    let model = fit(d, opts)?;
    exact_with_model(model, ceiling)
}

pub(crate) fn exact_with_model(model: CanonicalModel, ceiling: usize) -> Result<ExactEntropy> {
    let d = model.target().ok_or(Error::NoTarget)?;
    let omega = count_graphs(d, ceiling)?;
    if omega.is_zero() {
        return Err(Error::NotGraphical);
    }
    let value = -joint_pb_log_at_constraint(&model, &omega)?;
    let g_star = realize(d).ok_or(Error::NotGraphical)?;
    let log_ratio = -omega.log_omega - canonical_log_probability(&model, &g_star)?;
    if (value - log_ratio).abs() > ROUTE_AGREEMENT * value.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "exact relative entropy routes disagree: {value} vs {log_ratio}"
        )));
    }
    Ok(ExactEntropy {
        value,
        log_ratio,
        omega,
        model,
    })
}

pub fn relative_entropy_exact(d: &DegreeSequence, opts: &FitOptions, ceiling: usize) -> Result<f64> {
    exact_breakdown(d, opts, ceiling).map(|e| e.value)
}

/// `½ log det(2πQ) = ½ (n log 2π + log det Q)`.
pub fn relative_entropy_asymptotic(model: &CanonicalModel) -> Result<f64> {
    let ld = log_determinants(&covariance_matrix(model))?;
    Ok(asymptotic_from_logdet(model.n(), ld.logdet_q))
}

pub fn asymptotic_from_logdet(n: usize, logdet_q: f64) -> f64 {
    0.5 * (n as f64 * LN_2PI + logdet_q)
}

/// `sum_i g(k_i)`; every degree must be at least one.
pub fn relative_entropy_sparse_approx(d: &DegreeSequence) -> Result<f64> {
    d.degrees().iter().map(|&k| kl_dirac_poisson(k as u64)).sum()
}

/// The sparse approximation applied to the dual sequence, the natural form in
/// the ultra-dense regime.
pub fn relative_entropy_sparse_approx_dual(d: &DegreeSequence) -> Result<f64> {
    relative_entropy_sparse_approx(&dual_sequence(d))
}

/// `s = S / alpha_n`; undefined for `alpha_n <= 0`.
pub fn specific_density(s: f64, scale: &ScaleReport) -> Result<f64> {
    if scale.alpha_n <= 0.0 {
        return Err(Error::ScaleUndefined(scale.alpha_n));
    }
    Ok(s / scale.alpha_n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub degrees: Vec<usize>,
    pub dual: Vec<usize>,
    pub s_exact: f64,
    pub s_exact_dual: f64,
    pub difference: f64,
    pub omega_equal: bool,
    /// `max |theta_i + theta'_i|`. Diagnostic only: on the boundary of the
    /// degree polytope some multipliers diverge and this is poorly conditioned.
    pub max_theta_mismatch: f64,
    /// `max_{i != j} |p_ij + p'_ij - 1|`.
    pub max_probability_mismatch: f64,
    pub passed: bool,
}

pub const DUALITY_TOL: f64 = 1e-9;

/// Exact relative entropy of `d` and of its dual, which must coincide.
pub fn duality_check(d: &DegreeSequence, opts: &FitOptions, ceiling: usize) -> Result<DualityReport> {
    let dual = dual_sequence(d);
    let a = exact_breakdown(d, opts, ceiling)?;
    let b = exact_breakdown(&dual, opts, ceiling)?;
    let difference = (a.value - b.value).abs();
    let max_theta_mismatch = a
        .model
        .theta()
        .iter()
        .zip(b.model.theta())
        .map(|(x, y)| (x + y).abs())
        .fold(0.0, f64::max);
    let max_probability_mismatch = (a.model.p() + b.model.p())
        .iter()
        .enumerate()
        .filter(|(idx, _)| idx % (d.n() + 1) != 0)
        .map(|(_, v)| (v - 1.0).abs())
        .fold(0.0, f64::max);
    let omega_equal = a.omega.omega == b.omega.omega;
    Ok(DualityReport {
        degrees: d.degrees().to_vec(),
        dual: dual.degrees().to_vec(),
        s_exact: a.value,
        s_exact_dual: b.value,
        difference,
        omega_equal,
        max_theta_mismatch,
        max_probability_mismatch,
        passed: difference <= DUALITY_TOL && omega_equal,
    })
}

/// Which parts of an [`EntropyReport`] to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRequest {
    pub exact: bool,
    pub asymptotic: bool,
    pub sparse: bool,
}

impl EntropyRequest {
    pub const ALL: Self = Self {
        exact: true,
        asymptotic: true,
        sparse: true,
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub schema: String,
    pub n: usize,
    pub degrees: Vec<usize>,
    pub s_exact: Option<f64>,
    pub s_asymptotic: Option<f64>,
    pub s_sparse: Option<f64>,
    pub alpha_n: f64,
    pub s_alpha_exact: Option<f64>,
    pub s_alpha_asymptotic: Option<f64>,
    pub ratio_exact_over_asymptotic: Option<f64>,
    pub fit_residual: f64,
    pub fit_iterations: usize,
}

/// Builds the report; the exact part is skipped (left `None`) when `d` is
/// larger than `ceiling` unless `request.exact` demands it, in which case the
/// size error propagates.
pub fn entropy_report(
    d: &DegreeSequence,
    opts: &FitOptions,
    ceiling: usize,
    request: EntropyRequest,
) -> Result<EntropyReport> {
    let model = fit(d, opts)?;
    let scale = scale_parameter(d)?;
    let s_exact = if request.exact {
        Some(exact_with_model(model.clone(), ceiling)?.value)
    } else {
        None
    };
    let s_asymptotic = if request.asymptotic {
        Some(relative_entropy_asymptotic(&model)?)
    } else {
        None
    };
    let s_sparse = if request.sparse {
        Some(relative_entropy_sparse_approx(d)?)
    } else {
        None
    };
    Ok(assemble(d, &model, &scale, s_exact, s_asymptotic, s_sparse))
}

pub(crate) fn assemble(
    d: &DegreeSequence,
    model: &CanonicalModel,
    scale: &ScaleReport,
    s_exact: Option<f64>,
    s_asymptotic: Option<f64>,
    s_sparse: Option<f64>,
) -> EntropyReport {
    let density = |s: Option<f64>| s.and_then(|s| specific_density(s, scale).ok());
    EntropyReport {
        schema: REPORT_SCHEMA.to_string(),
        n: d.n(),
        degrees: d.degrees().to_vec(),
        s_exact,
        s_asymptotic,
        s_sparse,
        alpha_n: scale.alpha_n,
        s_alpha_exact: density(s_exact),
        s_alpha_asymptotic: density(s_asymptotic),
        ratio_exact_over_asymptotic: s_exact.zip(s_asymptotic).map(|(e, a)| e / a),
        fit_residual: model.residual(),
        fit_iterations: model.iterations(),
    }
}
