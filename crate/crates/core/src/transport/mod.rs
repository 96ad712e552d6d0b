//! Exact Wasserstein distance between two distributions on a shared space.
//!
//! The transportation LP is solved on the supports of the two marginals by a
//! primal network simplex ([`network_simplex`]). A small dense two-phase
//! simplex ([`dense_lp`]) serves as an independent oracle for tests.

mod dense_lp;
mod network_simplex;

use crate::error::{Error, Result};
use crate::hypothesis_space::Categorical;
use crate::utility::{write_dense, LipschitzCost};

pub use dense_lp::solve_standard_form;

/// Probabilities below this are dropped from a support before solving.
pub const SUPPORT_TRIM: f64 = 1e-15;

/// Largest support (per side) accepted by [`wasserstein_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 6;

/// Transport plan over `rows × cols`, both given as hypothesis indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Row-major `rows.len() × cols.len()`.
    pub gamma: Vec<f64>,
    pub row_marginal: Vec<f64>,
    pub col_marginal: Vec<f64>,
}

impl Coupling {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.gamma[r * self.cols.len() + c]
    }

    /// Largest absolute deviation of either marginal of `gamma` from its target.
    pub fn marginal_violation(&self) -> f64 {
        let nc = self.cols.len();
        let mut worst = 0.0f64;
        for (r, &target) in self.row_marginal.iter().enumerate() {
            let s: f64 = self.gamma[r * nc..(r + 1) * nc].iter().sum();
            worst = worst.max((s - target).abs());
        }
        for (c, &target) in self.col_marginal.iter().enumerate() {
            let s: f64 = (0..self.rows.len()).map(|r| self.gamma[r * nc + c]).sum();
            worst = worst.max((s - target).abs());
        }
        worst
    }

    pub fn min_entry(&self) -> f64 {
        self.gamma.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Transport cost of this plan.
    pub fn cost(&self, cost: &LipschitzCost) -> f64 {
        let nc = self.cols.len();
        let mut total = 0.0;
        for (r, &i) in self.rows.iter().enumerate() {
            for (c, &j) in self.cols.iter().enumerate() {
                total += self.gamma[r * nc + c] * cost.get(i, j);
            }
        }
        total
    }

    /// Plan expanded to the full `size × size` space.
    pub fn to_dense(&self, size: usize) -> Vec<f64> {
        let mut out = vec![0.0; size * size];
        let nc = self.cols.len();
        for (r, &i) in self.rows.iter().enumerate() {
            for (c, &j) in self.cols.iter().enumerate() {
                out[i * size + j] = self.gamma[r * nc + c];
            }
        }
        out
    }

    pub fn to_text(&self, size: usize) -> String {
        write_dense(size, size, &self.to_dense(size))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverStats {
    pub iterations: usize,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub distance: f64,
    pub coupling: Coupling,
    pub stats: SolverStats,
}

/// Support indices and renormalized masses after trimming tiny entries.
pub fn trimmed_support(dist: &Categorical) -> (Vec<usize>, Vec<f64>) {
    let idx: Vec<usize> = dist
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= SUPPORT_TRIM)
        .map(|(i, _)| i)
        .collect();
    let total: f64 = idx.iter().map(|&i| dist.prob(i)).sum();
    let mass = idx.iter().map(|&i| dist.prob(i) / total).collect();
    (idx, mass)
}

fn check_inputs(nu: &Categorical, mu: &Categorical, cost: &LipschitzCost) -> Result<()> {
    nu.check_same_space(mu)?;
    if cost.size() != nu.len() {
        return Err(Error::SpaceMismatch {
            left: cost.size(),
            right: nu.len(),
        });
    }
    Ok(())
}

fn support_costs(rows: &[usize], cols: &[usize], cost: &LipschitzCost) -> Vec<f64> {
    let mut c = Vec::with_capacity(rows.len() * cols.len());
    for &i in rows {
        for &j in cols {
            c.push(cost.get(i, j));
        }
    }
    c
}

/// Optimal transport cost from `nu` to `mu` under `cost`, with its plan.
pub fn wasserstein(nu: &Categorical, mu: &Categorical, cost: &LipschitzCost) -> Result<TransportResult> {
    check_inputs(nu, mu, cost)?;
    let (rows, supply) = trimmed_support(nu);
    let (cols, demand) = trimmed_support(mu);
    let costs = support_costs(&rows, &cols, cost);
    let solved = network_simplex::solve(&supply, &demand, &costs)?;
    let distance = solved
        .flow
        .iter()
        .zip(&costs)
        .map(|(f, c)| f * c)
        .sum::<f64>()
        .max(0.0);
    let stats = SolverStats {
        iterations: solved.iterations,
        rows: rows.len(),
        cols: cols.len(),
    };
    Ok(TransportResult {
        distance,
        coupling: Coupling {
            rows,
            cols,
            gamma: solved.flow,
            row_marginal: supply,
            col_marginal: demand,
        },
        stats,
    })
}

/// Same optimum as [`wasserstein`], from a dense simplex on the full LP.
/// Only for supports of at most [`BRUTEFORCE_LIMIT`] points per side.
pub fn wasserstein_bruteforce(nu: &Categorical, mu: &Categorical, cost: &LipschitzCost) -> Result<f64> {
    check_inputs(nu, mu, cost)?;
    let (rows, supply) = trimmed_support(nu);
    let (cols, demand) = trimmed_support(mu);
    if rows.len() > BRUTEFORCE_LIMIT || cols.len() > BRUTEFORCE_LIMIT {
        return Err(Error::SupportTooLarge {
            rows: rows.len(),
            cols: cols.len(),
        });
    }
    let (m, n) = (rows.len(), cols.len());
    let mut a = vec![vec![0.0; m * n]; m + n];
    for i in 0..m {
        for j in 0..n {
            a[i][i * n + j] = 1.0;
            a[m + j][i * n + j] = 1.0;
        }
    }
    let b: Vec<f64> = supply.iter().chain(&demand).cloned().collect();
    let c = support_costs(&rows, &cols, cost);
    let (value, _) = solve_standard_form(&a, &b, &c)?;
    Ok(value.max(0.0))
}
