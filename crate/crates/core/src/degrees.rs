//! Degree sequences: validation, graphicality, the complement (dual) map, the
//! `alpha_n` scale and finite-size regime flags.

use serde::{Deserialize, Serialize};

use crate::canonical::CanonicalModel;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Target degrees `k_i` of an `n`-node simple graph.
///
/// [`DegreeSequence::new`] enforces the canonical-fit domain `1 <= k_i <= n-2`;
/// [`DegreeSequence::relaxed`] only requires `0 <= k_i <= n-1` and is meant for
/// counting and graphicality checks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DegreeSequence {
    degrees: Vec<usize>,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<usize>) -> Result<Self> {
        let n = degrees.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        check_range(&degrees, 1, n.saturating_sub(2))?;
        Ok(Self { degrees })
    }

    pub fn relaxed(degrees: Vec<usize>) -> Result<Self> {
        let n = degrees.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        check_range(&degrees, 0, n - 1)?;
        Ok(Self { degrees })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn sum(&self) -> usize {
        self.degrees.iter().sum()
    }

    pub fn has_even_sum(&self) -> bool {
        self.sum().is_multiple_of(2)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.degrees.iter().copied().min().unwrap_or(0)
    }

    /// True when every degree lies in `{1, ..., n-2}`.
    pub fn in_fit_domain(&self) -> bool {
        check_range(&self.degrees, 1, self.n().saturating_sub(2)).is_ok()
    }

    pub(crate) fn check_fit_domain(&self) -> Result<()> {
        check_range(&self.degrees, 1, self.n().saturating_sub(2))
    }
}

fn check_range(degrees: &[usize], min: usize, max: usize) -> Result<()> {
    match degrees.iter().position(|&k| k < min || k > max) {
        Some(node) => Err(Error::DegreeOutOfRange {
            node,
            degree: degrees[node],
            min,
            max,
        }),
        None => Ok(()),
    }
}

/// Erdős–Gallai test.
pub fn is_graphical(d: &DegreeSequence) -> bool {
    if !d.has_even_sum() {
        return false;
    }
    let mut k = d.degrees().to_vec();
    k.sort_unstable_by(|a, b| b.cmp(a));
    let n = k.len();
    let mut head = 0usize;
    for r in 1..=n {
        head += k[r - 1];
        let tail: usize = k[r..].iter().map(|&x| x.min(r)).sum();
        if head > r * (r - 1) + tail {
            return false;
        }
    }
    true
}

/// `l_i = n - 1 - k_i`; the complement of any realisation of `d` realises it.
pub fn dual_sequence(d: &DegreeSequence) -> DegreeSequence {
    let n = d.n();
    DegreeSequence {
        degrees: d.degrees().iter().map(|&k| n - 1 - k).collect(),
    }
}

/// Builds one realising graph by Havel–Hakimi, or `None` when `d` is not graphical.
pub fn realize(d: &DegreeSequence) -> Option<Graph> {
    let n = d.n();
    let mut residual: Vec<usize> = d.degrees().to_vec();
    let mut g = Graph::empty(n);
    loop {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| residual[b].cmp(&residual[a]).then(a.cmp(&b)));
        let v = order[0];
        let r = residual[v];
        if r == 0 {
            return Some(g);
        }
        let targets = &order[1..];
        if targets.len() < r || residual[targets[r - 1]] == 0 {
            return None;
        }
        for &u in &targets[..r] {
            g.set_edge(v, u, true);
            residual[u] -= 1;
        }
        residual[v] = 0;
    }
}

/// `f_n(k)`, its mean over nodes, and `alpha_n = n * mean`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub f_values: Vec<f64>,
    pub f_bar: f64,
    pub alpha_n: f64,
}

/// `f_n(k) = ½ log[k(n-1-k)/n]`.
pub fn scale_term(n: usize, k: usize) -> f64 {
    0.5 * ((k as f64) * ((n - 1 - k) as f64) / n as f64).ln()
}

pub fn scale_parameter(d: &DegreeSequence) -> Result<ScaleReport> {
    d.check_fit_domain()?;
    let n = d.n();
    let f_values: Vec<f64> = d.degrees().iter().map(|&k| scale_term(n, k)).collect();
    let f_bar = f_values.iter().sum::<f64>() / n as f64;
    Ok(ScaleReport {
        f_values,
        f_bar,
        alpha_n: n as f64 * f_bar,
    })
}

/// Finite-size regime diagnostics. The sparse and ultra-dense flags replace
/// the `o(sqrt n)` conditions by `<= c * sqrt(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub max_degree: usize,
    pub min_degree: usize,
    pub sqrt_n: f64,
    pub sparse_flag: bool,
    pub ultradense_flag: bool,
    pub delta_hat: Option<f64>,
    pub tame_flag: Option<bool>,
}

pub const DEFAULT_REGIME_C: f64 = 1.0;

pub fn classify_regime(
    d: &DegreeSequence,
    model: Option<&CanonicalModel>,
    c: f64,
    delta_threshold: f64,
) -> RegimeReport {
    let n = d.n();
    let sqrt_n = (n as f64).sqrt();
    let max_dual = d.degrees().iter().map(|&k| n - 1 - k).max().unwrap_or(0);
    let delta_hat = model.map(CanonicalModel::delta_hat);
    RegimeReport {
        max_degree: d.max_degree(),
        min_degree: d.min_degree(),
        sqrt_n,
        sparse_flag: d.max_degree() as f64 <= c * sqrt_n,
        ultradense_flag: max_dual as f64 <= c * sqrt_n,
        delta_hat,
        tame_flag: delta_hat.map(|dh| dh >= delta_threshold),
    }
}
