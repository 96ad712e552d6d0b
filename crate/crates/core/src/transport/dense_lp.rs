//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Small and slow by design: it exists to cross-check the network simplex.

use crate::error::{Error, Result};

const EPS: f64 = 1e-12;

struct Tableau {
    /// `rows × (cols + 1)`; last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (v, &pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimize `cost · x` over columns `< allowed`, starting from the current basis.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<()> {
        let rhs = self.cols;
        for _ in 0..100_000 {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let rc = cost[j]
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(r, &b)| cost[b] * self.t[r][j])
                        .sum::<f64>();
                if rc < -EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.t.len() {
                let a = self.t[r][col];
                if a > EPS {
                    let ratio = self.t[r][rhs] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - EPS
                                || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::Solver("linear program is unbounded".into()));
            };
            self.pivot(row, col);
        }
        Err(Error::Solver("dense simplex did not terminate".into()))
    }
}

/// Minimize `c · x` subject to `A x = b`, `x ≥ 0`, with `b ≥ 0`.
/// Returns the optimal value and a primal solution.
pub fn solve_standard_form(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<(f64, Vec<f64>)> {
    let rows = a.len();
    let vars = c.len();
    if b.len() != rows || a.iter().any(|r| r.len() != vars) {
        return Err(Error::Solver("inconsistent LP dimensions".into()));
    }
    if b.iter().any(|&v| v < 0.0) {
        return Err(Error::Solver("right-hand side must be nonnegative".into()));
    }
    let cols = vars + rows;
    let t = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(r, (line, &rhs))| {
            let mut row = line.clone();
            row.extend((0..rows).map(|k| if k == r { 1.0 } else { 0.0 }));
            row.push(rhs);
            row
        })
        .collect();
    let mut tab = Tableau {
        t,
        basis: (vars..cols).collect(),
        cols,
    };

    let phase1: Vec<f64> = (0..cols).map(|j| if j < vars { 0.0 } else { 1.0 }).collect();
    tab.optimize(&phase1, cols)?;
    let infeasibility: f64 = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bv)| bv >= vars)
        .map(|(r, _)| tab.t[r][cols])
        .sum();
    if infeasibility > 1e-9 {
        return Err(Error::Solver(format!("linear program is infeasible ({infeasibility:e})")));
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < tab.t.len() {
        if tab.basis[r] >= vars {
            match (0..vars).find(|&j| tab.t[r][j].abs() > EPS && !tab.basis.contains(&j)) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.t.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, rows));
    tab.optimize(&phase2, vars)?;
    let mut x = vec![0.0; vars];
    for (r, &bv) in tab.basis.iter().enumerate() {
        if bv < vars {
            x[bv] = tab.t[r][cols];
        }
    }
    let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok((value, x))
}
