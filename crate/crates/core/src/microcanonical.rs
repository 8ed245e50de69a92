//! Exact number `Omega` of labelled simple graphs with a given degree sequence.
//!
//! The counter removes a node of maximum residual degree `r` and sums over its
//! possible neighbourhoods. Nodes of equal residual degree are interchangeable,
//! so a neighbourhood is described by how many nodes it takes from each degree
//! class (weighted by binomial coefficients), and subproblems are memoised on
//! the sorted multiset of remaining positive degrees.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::degrees::{dual_sequence, is_graphical, DegreeSequence};
use crate::error::{Error, Result};

pub use crate::graph::Graph;

pub const DEFAULT_CEILING: usize = 16;
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Exact graph count with its natural logarithm (`-inf` when zero).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCount {
    pub omega: BigUint,
    pub log_omega: f64,
}

impl GraphCount {
    pub fn new(omega: BigUint) -> Self {
        let log_omega = ln_biguint(&omega);
        Self { omega, log_omega }
    }

    pub fn is_zero(&self) -> bool {
        self.omega.is_zero()
    }
}

/// Serialised as a decimal string plus `log_omega` (`null` for zero).
#[derive(Serialize, Deserialize)]
struct GraphCountRepr {
    omega: String,
    log_omega: Option<f64>,
}

impl Serialize for GraphCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphCountRepr {
            omega: self.omega.to_str_radix(10),
            log_omega: self.log_omega.is_finite().then_some(self.log_omega),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GraphCount {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GraphCountRepr::deserialize(d)?;
        let omega = BigUint::parse_bytes(repr.omega.as_bytes(), 10)
            .ok_or_else(|| serde::de::Error::custom("omega is not a decimal integer"))?;
        Ok(Self::new(omega))
    }
}

pub(crate) fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 leading bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `Omega(d)`. Zero for non-graphical sequences; fails above `ceiling` nodes.
pub fn count_graphs(d: &DegreeSequence, ceiling: usize) -> Result<GraphCount> {
    let n = d.n();
    if n > ceiling {
        return Err(Error::TooLarge { n, ceiling });
    }
    if !is_graphical(d) {
        return Ok(GraphCount::new(BigUint::zero()));
    }
    // Complementation is a bijection; the sparser side has fewer neighbourhoods.
    let work = if 2 * d.sum() > n * (n - 1) { dual_sequence(d) } else { d.clone() };
    let mut state: Vec<u8> = work
        .degrees()
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| u8::try_from(k).expect("ceiling keeps degrees small"))
        .collect();
    state.sort_unstable_by(|a, b| b.cmp(a));
    let mut counter = Counter {
        memo: HashMap::new(),
        binom: binomial_table(n),
    };
    Ok(GraphCount::new(counter.count(state)))
}

struct Counter {
    memo: HashMap<Vec<u8>, BigUint>,
    binom: Vec<Vec<u64>>,
}

impl Counter {
    /// `state` is sorted descending and free of zeros.
    fn count(&mut self, state: Vec<u8>) -> BigUint {
        if state.is_empty() {
            return BigUint::one();
        }
        if let Some(v) = self.memo.get(&state) {
            return v.clone();
        }
        let r = state[0] as usize;
        let rest = &state[1..];
        let total = if r > rest.len() {
            BigUint::zero()
        } else {
            let classes = degree_classes(rest);
            let mut choice = vec![0usize; classes.len()];
            let mut total = BigUint::zero();
            self.distribute(&classes, &mut choice, 0, r, &mut total);
            total
        };
        self.memo.insert(state, total.clone());
        total
    }

    /// Enumerates how many nodes the neighbourhood takes from each class.
    fn distribute(
        &mut self,
        classes: &[(u8, usize)],
        choice: &mut [usize],
        idx: usize,
        remaining: usize,
        total: &mut BigUint,
    ) {
        if idx == classes.len() {
            if remaining == 0 {
                self.accumulate(classes, choice, total);
            }
            return;
        }
        let capacity: usize = classes[idx + 1..].iter().map(|c| c.1).sum();
        let lo = remaining.saturating_sub(capacity);
        let hi = remaining.min(classes[idx].1);
        for c in lo..=hi {
            choice[idx] = c;
            self.distribute(classes, choice, idx + 1, remaining - c, total);
        }
        choice[idx] = 0;
    }

    fn accumulate(&mut self, classes: &[(u8, usize)], choice: &[usize], total: &mut BigUint) {
        let mut weight = BigUint::one();
        let mut next = Vec::new();
        for (&(value, mult), &c) in classes.iter().zip(choice) {
            weight *= self.binom[mult][c];
            next.extend(std::iter::repeat_n(value, mult - c));
            if value > 1 {
                next.extend(std::iter::repeat_n(value - 1, c));
            }
        }
        next.sort_unstable_by(|a, b| b.cmp(a));
        if !sorted_graphical(&next) {
            return;
        }
        let sub = self.count(next);
        if !sub.is_zero() {
            *total += weight * sub;
        }
    }
}

/// `(value, multiplicity)` runs of a descending slice.
fn degree_classes(sorted: &[u8]) -> Vec<(u8, usize)> {
    let mut out: Vec<(u8, usize)> = Vec::new();
    for &v in sorted {
        match out.last_mut() {
            Some((last, m)) if *last == v => *m += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Erdős–Gallai on a descending slice of positive degrees.
fn sorted_graphical(k: &[u8]) -> bool {
    let n = k.len();
    if k.iter().map(|&v| v as usize).sum::<usize>() % 2 == 1 {
        return false;
    }
    let mut head = 0usize;
    for r in 1..=n {
        head += k[r - 1] as usize;
        let tail: usize = k[r..].iter().map(|&x| (x as usize).min(r)).sum();
        if head > r * (r - 1) + tail {
            return false;
        }
    }
    true
}

fn binomial_table(n: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; n + 1]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1] + if j < i { t[i - 1][j] } else { 0 };
        }
    }
    t
}

/// Walks all `2^{n(n-1)/2}` graphs in Gray-code order, calling `visit` with the
/// edge mask and the degree vector of each.
pub fn for_each_graph(n: usize, mut visit: impl FnMut(u64, &[usize])) -> Result<()> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge {
            n,
            ceiling: BRUTE_FORCE_MAX_N,
        });
    }
    let pair_list: Vec<(usize, usize)> = crate::graph::pairs(n).collect();
    let m = pair_list.len();
    let mut degrees = vec![0usize; n];
    let mut mask = 0u64;
    visit(mask, &degrees);
    for step in 1u64..1 << m {
        let bit = step.trailing_zeros() as usize;
        let (i, j) = pair_list[bit];
        mask ^= 1 << bit;
        if mask >> bit & 1 == 1 {
            degrees[i] += 1;
            degrees[j] += 1;
        } else {
            degrees[i] -= 1;
            degrees[j] -= 1;
        }
        visit(mask, &degrees);
    }
    Ok(())
}

/// Counts by exhaustive enumeration; `n <= 8`.
pub fn count_graphs_bruteforce(d: &DegreeSequence) -> Result<GraphCount> {
    let target = d.degrees();
    let mut count = 0u64;
    for_each_graph(d.n(), |_, k| {
        if k == target {
            count += 1;
        }
    })?;
    Ok(GraphCount::new(BigUint::from(count)))
}

/// `log P_mic(G) = -log Omega` for any realising `G`.
pub fn microcanonical_log_probability(d: &DegreeSequence, ceiling: usize) -> Result<f64> {
    let c = count_graphs(d, ceiling)?;
    if c.is_zero() {
        return Err(Error::ZeroCount);
    }
    Ok(-c.log_omega)
}
