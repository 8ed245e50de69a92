//! Poisson-Binomial and Poisson laws for canonical degrees.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::canonical::{canonical_log_probability_at_degrees, CanonicalModel};
use crate::error::{Error, Result};
use crate::microcanonical::GraphCount;

const UNDERFLOW_GUARD: f64 = 1e-300;

/// Law of a sum of independent Bernoulli(`probs[i]`) variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PBDistribution {
    pub probs: Vec<f64>,
    pub pmf: Vec<f64>,
}

impl PBDistribution {
    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.pmf
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - mu).powi(2) * p)
            .sum()
    }

    /// `k,probability` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,probability\n");
        for (k, p) in self.pmf.iter().enumerate() {
            out.push_str(&format!("{k},{p:e}\n"));
        }
        out
    }
}

/// Exact PMF by convolving the Bernoulli factors one at a time.
///
/// Runs in linear space; if any entry falls below `1e-300` the whole
/// convolution is redone in log space.
pub fn pb_pmf(probs: &[f64]) -> Result<PBDistribution> {
    if let Some(&p) = probs.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::InvalidProbability(p));
    }
    let pmf = linear_convolution(probs).unwrap_or_else(|| log_convolution(probs));
    Ok(PBDistribution {
        probs: probs.to_vec(),
        pmf,
    })
}

fn linear_convolution(probs: &[f64]) -> Option<Vec<f64>> {
    let mut pmf = Vec::with_capacity(probs.len() + 1);
    pmf.push(1.0);
    for &p in probs {
        pmf.push(0.0);
        for k in (1..pmf.len()).rev() {
            pmf[k] = pmf[k] * (1.0 - p) + pmf[k - 1] * p;
        }
        pmf[0] *= 1.0 - p;
        if pmf.iter().any(|&v| v < UNDERFLOW_GUARD) {
            return None;
        }
    }
    Some(pmf)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn log_convolution(probs: &[f64]) -> Vec<f64> {
    let mut lp = vec![0.0f64];
    for &p in probs {
        let (a, b) = ((1.0 - p).ln(), p.ln());
        lp.push(f64::NEG_INFINITY);
        for k in (1..lp.len()).rev() {
            lp[k] = log_add(lp[k] + a, lp[k - 1] + b);
        }
        lp[0] += a;
    }
    lp.into_iter().map(f64::exp).collect()
}

/// `e^{-lambda} lambda^k / k!` evaluated in log space.
pub fn poisson_pmf(lambda: f64, k: u64) -> f64 {
    (k as f64 * lambda.ln() - lambda - ln_factorial(k)).exp()
}

/// Relative entropy of a point mass at `k` with respect to Poisson(`k`):
/// `g(k) = log(k! / (e^{-k} k^k))`.
pub fn kl_dirac_poisson(k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("g(k) requires k >= 1".into()));
    }
    let kf = k as f64;
    Ok(ln_factorial(k) + kf - kf * kf.ln())
}

/// `log Q[k*](k*) = log Omega + log P_can(G*)`, the joint Poisson-Binomial
/// degree law of the canonical ensemble evaluated at its own constraint.
pub fn joint_pb_log_at_constraint(model: &CanonicalModel, omega: &GraphCount) -> Result<f64> {
    let target = model.target().ok_or(Error::NoTarget)?;
    if omega.is_zero() {
        return Err(Error::ZeroCount);
    }
    Ok(omega.log_omega + canonical_log_probability_at_degrees(model, target.degrees())?)
}

/// Marginal degree law of node `i`: Poisson-Binomial over `p_ij`, `j != i`.
pub fn degree_marginal(model: &CanonicalModel, i: usize) -> Result<PBDistribution> {
    if i >= model.n() {
        return Err(Error::Domain(format!("node {i} out of range for n = {}", model.n())));
    }
    let probs: Vec<f64> = (0..model.n()).filter(|&j| j != i).map(|j| model.p()[(i, j)]).collect();
    pb_pmf(&probs)
}

/// Total-variation distance between two PMFs on `0, 1, 2, ...` (missing tail
/// entries count as zero).
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    0.5 * (0..len)
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pb_examples() {
        let d = pb_pmf(&[1.0 / 3.0; 3]).unwrap();
        assert_abs_diff_eq!(d.pmf[1], 4.0 / 9.0, epsilon = 1e-15);
        let d = pb_pmf(&[0.3]).unwrap();
        assert_eq!(d.pmf, vec![0.7, 0.3]);
        let d = pb_pmf(&[0.5, 0.5]).unwrap();
        assert_eq!(d.pmf, vec![0.25, 0.5, 0.25]);
        assert_eq!(pb_pmf(&[]).unwrap().pmf, vec![1.0]);
        assert!(matches!(pb_pmf(&[0.5, 1.0]), Err(Error::InvalidProbability(p)) if p == 1.0));
        assert!(pb_pmf(&[0.0]).is_err());
    }

    #[test]
    fn enumeration_oracle_small() {
        let probs = [0.1, 0.45, 0.8, 0.3];
        let mut expect = [0.0; 5];
        for outcome in 0u32..16 {
            let mut w = 1.0;
            for (b, p) in probs.iter().enumerate() {
                w *= if outcome >> b & 1 == 1 { *p } else { 1.0 - p };
            }
            expect[outcome.count_ones() as usize] += w;
        }
        let d = pb_pmf(&probs).unwrap();
        for (a, b) in d.pmf.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn log_space_fallback_keeps_mass() {
        let probs = vec![0.999; 2000];
        let d = pb_pmf(&probs).unwrap();
        assert_abs_diff_eq!(d.pmf.iter().sum::<f64>(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(d.mean(), 1998.0, epsilon = 1e-8);
        assert!(d.pmf.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn poisson_examples() {
        assert_abs_diff_eq!(poisson_pmf(1.0, 0), (-1f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(poisson_pmf(1.0, 1), (-1f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(poisson_pmf(5.0, 5), (-5f64).exp() * 3125.0 / 120.0, epsilon = 1e-15);
        assert_abs_diff_eq!(poisson_pmf(5.0, 5), 0.175467, epsilon = 1e-6);
    }

    #[test]
    fn g_examples() {
        assert_abs_diff_eq!(kl_dirac_poisson(1).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(kl_dirac_poisson(2).unwrap(), 2.0 - 2f64.ln(), epsilon = 1e-12);
        let stirling = 0.5 * (200.0 * std::f64::consts::PI).ln() + 1.0 / 1200.0;
        assert!((kl_dirac_poisson(100).unwrap() - stirling).abs() < 1e-3);
        assert!(kl_dirac_poisson(0).is_err());
    }

    #[test]
    fn poisson_limit_tv_decreases() {
        let lambda = 3.0;
        let tv: Vec<f64> = [10usize, 100, 1000]
            .iter()
            .map(|&m| {
                let d = pb_pmf(&vec![lambda / m as f64; m]).unwrap();
                let poisson: Vec<f64> = (0..=m as u64).map(|k| poisson_pmf(lambda, k)).collect();
                total_variation(&d.pmf, &poisson)
            })
            .collect();
        assert!(tv[0] > tv[1] && tv[1] > tv[2], "{tv:?}");
    }

    #[test]
    fn gaussian_limit_third_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let probs: Vec<f64> = (0..500).map(|_| rng.random_range(0.3..0.7)).collect();
        let d = pb_pmf(&probs).unwrap();
        let (mu, sd) = (d.mean(), d.variance().sqrt());
        let third: f64 = d
            .pmf
            .iter()
            .enumerate()
            .map(|(k, p)| ((k as f64 - mu) / sd).powi(3).abs() * p)
            .sum();
        // Standardised third absolute moment of a normal is 2 sqrt(2/pi) ~ 1.596;
        // the skewness (signed third moment) must be near zero.
        let skew: f64 = d
            .pmf
            .iter()
            .enumerate()
            .map(|(k, p)| ((k as f64 - mu) / sd).powi(3) * p)
            .sum();
        assert!(skew.abs() < 0.1, "skewness {skew}");
        assert!((third - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.1, "{third}");
    }

    proptest! {
        #[test]
        fn pb_moments(probs in proptest::collection::vec(0.001f64..0.999, 0..200)) {
            let d = pb_pmf(&probs).unwrap();
            let mean: f64 = probs.iter().sum();
            let var: f64 = probs.iter().map(|p| p * (1.0 - p)).sum();
            prop_assert!((d.pmf.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(d.pmf.iter().all(|&v| v >= 0.0));
            prop_assert!((d.mean() - mean).abs() <= 1e-10);
            prop_assert!((d.variance() - var).abs() <= 1e-10);
        }
    }
}
