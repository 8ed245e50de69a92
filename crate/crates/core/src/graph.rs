//! Simple undirected graphs on labelled nodes `0..n`.

use crate::error::{Error, Result};

/// Symmetric adjacency with an empty diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![false; n * n],
        }
    }

    pub fn complete(n: usize) -> Self {
        Self::empty(n).complement()
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Domain(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(Error::Domain(format!("self-loop at node {i}")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    /// Decodes a bitmask over the pairs `i < j` in row-major order.
    pub fn from_edge_mask(n: usize, mask: u64) -> Self {
        let mut g = Self::empty(n);
        for (bit, (i, j)) in pairs(n).enumerate() {
            if mask >> bit & 1 == 1 {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Inverse of [`Graph::from_edge_mask`]; requires `n(n-1)/2 <= 64`.
    pub fn edge_mask(&self) -> u64 {
        assert!(self.n * self.n.saturating_sub(1) / 2 <= 64, "too many pairs for a u64 mask");
        pairs(self.n)
            .enumerate()
            .filter(|&(_, (i, j))| self.has_edge(i, j))
            .fold(0u64, |m, (bit, _)| m | 1 << bit)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.n + j]
    }

    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j, "self-loops are not allowed");
        self.adj[i * self.n + j] = present;
        self.adj[j * self.n + i] = present;
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| (0..self.n).filter(|&j| self.has_edge(i, j)).count())
            .collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        pairs(self.n).filter(|&(i, j)| self.has_edge(i, j)).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.edges().len()
    }

    pub fn complement(&self) -> Self {
        let mut g = Self::empty(self.n);
        for (i, j) in pairs(self.n) {
            g.set_edge(i, j, !self.has_edge(i, j));
        }
        g
    }

    /// One `"i j"` line per edge, 0-indexed.
    pub fn to_edge_list(&self) -> String {
        self.edges()
            .into_iter()
            .map(|(i, j)| format!("{i} {j}\n"))
            .collect()
    }
}

/// Unordered pairs `(i, j)` with `i < j`, row-major.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}
