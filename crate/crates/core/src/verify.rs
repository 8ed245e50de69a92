//! Invariant suite behind the `verify` subcommand.
//!
//! Oracle-backed checks (exhaustive enumeration of all graphs) run for
//! `n <= 7`; the remaining checks run up to the exact-count ceiling.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::canonical::{canonical_log_probability_at_degrees, fit, max_entropy_check, FitOptions};
use crate::covariance::covariance_report;
use crate::degrees::{dual_sequence, is_graphical, realize, DegreeSequence};
use crate::distributions::joint_pb_log_at_constraint;
use crate::entropy::{duality_check, exact_with_model};
use crate::error::{Error, Result};
use crate::microcanonical::for_each_graph;

pub const VERIFY_SCHEMA: &str = "ensemble-gap/verify/v1";
pub const ORACLE_MAX_N: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    fn at_most(name: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: residual <= tolerance,
            residual,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: String,
    pub degrees: Vec<usize>,
    pub dual: Vec<usize>,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

/// Runs every applicable check. Invalid (non-graphical or out-of-domain)
/// input is an error rather than a failed check.
pub fn run_verification(d: &DegreeSequence, opts: &FitOptions, ceiling: usize) -> Result<VerifyReport> {
    d.check_fit_domain()?;
    if !is_graphical(d) {
        return Err(Error::NotGraphical);
    }
    let n = d.n();
    let model = fit(d, opts)?;
    let mut checks = vec![Check::at_most("fit_residual", model.residual(), opts.tol)];

    let exact = exact_with_model(model.clone(), ceiling)?;
    checks.push(Check::at_most(
        "exact_routes_agree",
        (exact.value - exact.log_ratio).abs(),
        1e-10,
    ));
    checks.push(Check::at_most("relative_entropy_positive", -exact.value, 0.0));
    let pb = joint_pb_log_at_constraint(&model, &exact.omega)?;
    checks.push(Check::at_most("pb_identity", (exact.value + pb).abs(), 1e-12));

    let dual = duality_check(d, opts, ceiling)?;
    checks.push(Check::at_most("duality_entropy", dual.difference, 1e-9));
    checks.push(Check::at_most(
        "duality_count",
        if dual.omega_equal { 0.0 } else { 1.0 },
        0.0,
    ));
    checks.push(Check::at_most("duality_probabilities", dual.max_probability_mismatch, 1e-8));

    let g_star = realize(d).ok_or(Error::NotGraphical)?;
    let me = max_entropy_check(&model, &g_star)?;
    checks.push(Check::at_most(
        "max_entropy_identity",
        (me.log_pcan_at_constraint + me.hamiltonian_value).abs(),
        1e-9,
    ));
    checks.push(Check::at_most("kkt_residual", me.kkt_residual, 1e-8));

    let cov = covariance_report(&model)?;
    let q = &cov.q;
    let row_identity = (0..n)
        .map(|i| (q[(i, i)] - (0..n).filter(|&j| j != i).map(|j| q[(i, j)]).sum::<f64>()).abs())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("q_row_identity", row_identity, 1e-12));
    checks.push(Check::at_most(
        "q_positive_semidefinite",
        -cov.eigenvalues_q.first().copied().unwrap_or(0.0),
        1e-9,
    ));
    checks.push(Check::at_most(
        "markov_top_eigenvalue",
        (cov.a_spectrum.last().copied().unwrap_or(1.0) - 1.0).abs(),
        1e-9,
    ));
    checks.push(Check::at_most(
        "ipsen_lee_lower",
        cov.ipsen_lee_lower - cov.logdet_q,
        1e-9,
    ));
    checks.push(Check::at_most(
        "ipsen_lee_upper",
        cov.logdet_q - cov.ipsen_lee_upper,
        1e-9,
    ));
    checks.push(Check::at_most("zhang_bound", cov.zhang_bound - cov.lambda_min_a, 1e-9));

    if n <= ORACLE_MAX_N {
        let table = degree_table(n)?;
        let omega_bf = table.get(d.degrees()).copied().unwrap_or(0);
        checks.push(Check::at_most(
            "count_matches_enumeration",
            if exact.omega.omega == omega_bf.into() { 0.0 } else { 1.0 },
            0.0,
        ));
        let oracle = enumerated_covariance(&table, &model)?;
        let diff = (&oracle - q).abs().max();
        checks.push(Check::at_most("covariance_matches_enumeration", diff, 1e-9));
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        schema: VERIFY_SCHEMA.to_string(),
        degrees: d.degrees().to_vec(),
        dual: dual_sequence(d).degrees().to_vec(),
        checks,
        all_passed,
    })
}

/// Number of graphs on `n` nodes per degree vector.
fn degree_table(n: usize) -> Result<HashMap<Vec<usize>, u64>> {
    let mut table: HashMap<Vec<usize>, u64> = HashMap::new();
    for_each_graph(n, |_, k| *table.entry(k.to_vec()).or_default() += 1)?;
    Ok(table)
}

/// Degree covariance under `P_can`, summed over every graph.
fn enumerated_covariance(
    table: &HashMap<Vec<usize>, u64>,
    model: &crate::canonical::CanonicalModel,
) -> Result<DMatrix<f64>> {
    let n = model.n();
    let mut mean = DVector::zeros(n);
    let mut second = DMatrix::zeros(n, n);
    for (k, &count) in table {
        let w = count as f64 * canonical_log_probability_at_degrees(model, k)?.exp();
        let kv = DVector::from_iterator(n, k.iter().map(|&v| v as f64));
        mean += w * &kv;
        second += w * &kv * kv.transpose();
    }
    Ok(second - &mean * mean.transpose())
}
