//! Transition matrices and their Perron-Frobenius data.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::EdgeId;
use crate::map::GraphSelfMap;

/// Iteration cap for [`TransitionMatrix::spectral_radius`].
pub const POWER_ITERATION_CAP: usize = 1_000_000;

/// `entry[i][j]` counts how often the image of edge `j` crosses edge `i`,
/// in either direction. Rows and columns follow edge-id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix {
    edges: Vec<EdgeId>,
    entries: Vec<Vec<u64>>,
}

impl TransitionMatrix {
    pub fn from_map(f: &GraphSelfMap) -> Self {
        let edges: Vec<EdgeId> = f.graph().edges().collect();
        let index = |e: EdgeId| edges.binary_search(&e).expect("edge of the graph");
        let n = edges.len();
        let mut entries = vec![vec![0u64; n]; n];
        for (j, &e) in edges.iter().enumerate() {
            for d in f.edge_image(e).iter() {
                entries[index(d.edge)][j] += 1;
            }
        }
        Self { edges, entries }
    }

    /// A square matrix indexed by `0..n`.
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Self {
        let n = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == n),
            "transition matrix must be square"
        );
        Self {
            edges: (0..n as u32).map(EdgeId).collect(),
            entries: rows,
        }
    }

    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.entries
    }

    pub fn is_permutation(&self) -> bool {
        let n = self.dim();
        let rows_ok = self.entries.iter().all(|r| r.iter().sum::<u64>() == 1);
        let cols_ok = (0..n).all(|j| (0..n).map(|i| self.entries[i][j]).sum::<u64>() == 1);
        rows_ok && cols_ok
    }

    /// Exact test for spectral radius 1: every strongly connected block
    /// that carries an arc is a single cycle of ones, and there is one.
    pub fn has_growth_one(&self) -> bool {
        let mut any_cycle = false;
        for comp in self.strong_components() {
            let inside: u64 = comp
                .iter()
                .flat_map(|&i| comp.iter().map(move |&j| (i, j)))
                .map(|(i, j)| self.entries[i][j])
                .sum();
            if inside == 0 {
                continue;
            }
            // a strongly connected block with exactly one arc per vertex is a cycle
            let one_per_row = comp
                .iter()
                .all(|&i| comp.iter().map(|&j| self.entries[i][j]).sum::<u64>() == 1);
            if !one_per_row {
                return false;
            }
            any_cycle = true;
        }
        any_cycle
    }

    /// Indices reachable from `j` along arcs `j -> i` with `entry[i][j] > 0`,
    /// `j` itself included.
    pub fn reachable_from(&self, j: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([j]);
        let mut stack = vec![j];
        while let Some(c) = stack.pop() {
            for i in 0..self.dim() {
                if self.entries[i][c] > 0 && seen.insert(i) {
                    stack.push(i);
                }
            }
        }
        seen
    }

    /// Strongly connected components of the arc relation, each sorted.
    pub fn strong_components(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        let reach: Vec<BTreeSet<usize>> = (0..n).map(|j| self.reachable_from(j)).collect();
        let mut assigned = vec![false; n];
        let mut comps = Vec::new();
        for a in 0..n {
            if assigned[a] {
                continue;
            }
            let comp: Vec<usize> = (a..n)
                .filter(|&b| !assigned[b] && reach[a].contains(&b) && reach[b].contains(&a))
                .collect();
            for &b in &comp {
                assigned[b] = true;
            }
            comps.push(comp);
        }
        comps
    }

    /// Strong connectivity of the digraph with an arc `j -> i` whenever
    /// `entry[i][j] > 0`.
    pub fn is_irreducible(&self) -> bool {
        self.dim() == 0
            || self.reachable_from(0).len() == self.dim()
                && (0..self.dim()).all(|j| self.reachable_from(j).contains(&0))
    }

    /// Perron-Frobenius eigenvalue.
    ///
    /// The spectral radius of a nonnegative matrix is the largest one among
    /// its irreducible diagonal blocks. Each block `B` is iterated as
    /// `B + I` (primitive, so the iteration converges) from the all-ones
    /// vector, and stops once the Collatz-Wielandt bounds
    /// `min (Bx)_i / x_i <= λ <= max (Bx)_i / x_i` are closer than `tol`.
    pub fn spectral_radius(&self, tol: f64) -> Result<f64> {
        assert!(tol > 0.0, "tolerance must be positive");
        let mut best = 0.0f64;
        for comp in self.strong_components() {
            let lambda = if comp.len() == 1 {
                self.entries[comp[0]][comp[0]] as f64
            } else {
                self.block_radius(&comp, tol)?
            };
            best = best.max(lambda);
        }
        Ok(best)
    }

    fn block_radius(&self, comp: &[usize], tol: f64) -> Result<f64> {
        let k = comp.len();
        let block: Vec<Vec<f64>> = comp
            .iter()
            .map(|&i| comp.iter().map(|&j| self.entries[i][j] as f64).collect())
            .collect();
        let mut x = vec![1.0f64; k];
        for _ in 0..POWER_ITERATION_CAP {
            let bx: Vec<f64> = block
                .iter()
                .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
                .collect();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..k {
                let q = bx[i] / x[i];
                lo = lo.min(q);
                hi = hi.max(q);
            }
            if hi - lo < tol {
                return Ok(if hi == lo { hi } else { 0.5 * (lo + hi) });
            }
            let mut next: Vec<f64> = bx.iter().zip(&x).map(|(a, b)| a + b).collect();
            let scale = next.iter().cloned().fold(0.0, f64::max);
            for v in &mut next {
                *v /= scale;
            }
            x = next;
        }
        Err(Error::SpectralNotConverged(POWER_ITERATION_CAP))
    }
}

/// Convenience wrapper for [`TransitionMatrix::spectral_radius`].
pub fn spectral_radius(m: &TransitionMatrix, tol: f64) -> Result<f64> {
    m.spectral_radius(tol)
}

/// Convenience wrapper for [`TransitionMatrix::is_irreducible`].
pub fn is_irreducible(m: &TransitionMatrix) -> bool {
    m.is_irreducible()
}
