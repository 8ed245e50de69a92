//! Seeded sampling from the canonical ensemble.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. [`empirical_report`] splits the work into fixed-size
//! chunks; chunk `c` draws from stream `c + 1` of the same seed, so results do
//! not depend on thread scheduling. Degree sums are accumulated in integers
//! and are therefore exact and order independent.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::{expected_degrees, CanonicalModel};
use crate::covariance::covariance_matrix;
use crate::graph::{pairs, Graph};

const CHUNK: usize = 1 << 14;

/// Draws graphs one after another from a single stream.
pub struct GraphSampler<'a> {
    model: &'a CanonicalModel,
    rng: ChaCha8Rng,
}

impl<'a> GraphSampler<'a> {
    pub fn new(model: &'a CanonicalModel, seed: u64) -> Self {
        Self::with_stream(model, seed, 0)
    }

    fn with_stream(model: &'a CanonicalModel, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { model, rng }
    }

    pub fn next_graph(&mut self) -> Graph {
        let n = self.model.n();
        let mut g = Graph::empty(n);
        for (i, j) in pairs(n) {
            if self.rng.random::<f64>() < self.model.p()[(i, j)] {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Degree vector of a fresh sample, without materialising the graph.
    fn next_degrees(&mut self, out: &mut [usize]) {
        out.fill(0);
        for (i, j) in pairs(self.model.n()) {
            if self.rng.random::<f64>() < self.model.p()[(i, j)] {
                out[i] += 1;
                out[j] += 1;
            }
        }
    }
}

/// Every edge `{i, j}` present independently with probability `p_ij`.
pub fn sample_graph(model: &CanonicalModel, seed: u64) -> Graph {
    GraphSampler::new(model, seed).next_graph()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleReport {
    pub num_samples: usize,
    pub mean_degrees: Vec<f64>,
    /// Unbiased (`N - 1`) sample covariance of the degree vector.
    #[serde(serialize_with = "crate::io::serialize_matrix")]
    pub empirical_cov: DMatrix<f64>,
    /// `max_i |mean_i - k_i| / sqrt(q_ii / N)`.
    pub max_mean_z: f64,
    pub seed: u64,
}

#[derive(Clone)]
struct Moments {
    sum: Vec<u64>,
    cross: Vec<u64>,
}

impl Moments {
    fn zero(n: usize) -> Self {
        Self {
            sum: vec![0; n],
            cross: vec![0; n * n],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.sum.iter_mut().zip(&other.sum).for_each(|(a, b)| *a += b);
        self.cross.iter_mut().zip(&other.cross).for_each(|(a, b)| *a += b);
        self
    }
}

/// Sample means and covariances of the degrees over `num_samples` draws.
/// Deviations are measured against the target degrees when the model has them,
/// otherwise against the expected degrees.
pub fn empirical_report(model: &CanonicalModel, num_samples: usize, seed: u64) -> SampleReport {
    let n = model.n();
    let chunks = num_samples.div_ceil(CHUNK);
    let moments = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(num_samples - c * CHUNK);
            let mut sampler = GraphSampler::with_stream(model, seed, c as u64 + 1);
            let mut m = Moments::zero(n);
            let mut k = vec![0usize; n];
            for _ in 0..len {
                sampler.next_degrees(&mut k);
                for i in 0..n {
                    m.sum[i] += k[i] as u64;
                    for j in i..n {
                        m.cross[i * n + j] += (k[i] * k[j]) as u64;
                    }
                }
            }
            m
        })
        .reduce(|| Moments::zero(n), Moments::merge);

    let big_n = num_samples as f64;
    let mean: Vec<f64> = moments.sum.iter().map(|&s| s as f64 / big_n).collect();
    let mut cov = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            // sum (k_i - m_i)(k_j - m_j) = sum k_i k_j - N m_i m_j
            let s = moments.cross[i * n + j] as f64 - big_n * mean[i] * mean[j];
            let v = s / (big_n - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let reference: Vec<f64> = match model.target() {
        Some(t) => t.degrees().iter().map(|&k| k as f64).collect(),
        None => expected_degrees(model),
    };
    let q = covariance_matrix(model);
    let max_mean_z = (0..n)
        .map(|i| (mean[i] - reference[i]).abs() / (q[(i, i)] / big_n).sqrt())
        .fold(0.0, f64::max);
    SampleReport {
        num_samples,
        mean_degrees: mean,
        empirical_cov: cov,
        max_mean_z,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{fit, FitOptions};
    use crate::degrees::DegreeSequence;

    fn regular4() -> CanonicalModel {
        fit(&DegreeSequence::new(vec![1; 4]).unwrap(), &FitOptions::default()).unwrap()
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let m = regular4();
        assert_eq!(sample_graph(&m, 42), sample_graph(&m, 42));
        let a = empirical_report(&m, 50_000, 9);
        let b = empirical_report(&m, 50_000, 9);
        assert_eq!(a, b);
        assert_eq!(a.empirical_cov, b.empirical_cov);
    }

    #[test]
    fn near_zero_probabilities_give_empty_graphs() {
        // theta with p = 1e-9 on every pair.
        let t = 0.5 * ((1.0 - 1e-9) / 1e-9f64).ln();
        let m = CanonicalModel::from_theta(vec![t; 4], None).unwrap();
        for seed in 0..1000 {
            assert_eq!(sample_graph(&m, seed).num_edges(), 0);
        }
    }

    #[test]
    fn tiny_sample_report() {
        let r = empirical_report(&regular4(), 2, 1);
        assert_eq!(r.num_samples, 2);
        assert_eq!(r.empirical_cov, r.empirical_cov.transpose());
        assert!(r.mean_degrees.iter().all(|&m| (0.0..=3.0).contains(&m)));
    }

    #[test]
    fn regular_models_stay_within_five_sigma() {
        for (n, k) in [(4usize, 1usize), (8, 3), (12, 6), (20, 4)] {
            let m = fit(&DegreeSequence::new(vec![k; n]).unwrap(), &FitOptions::default()).unwrap();
            let r = empirical_report(&m, 100_000, 2024 + n as u64);
            assert!(r.max_mean_z <= 5.0, "n={n}: z={}", r.max_mean_z);
        }
    }
}
