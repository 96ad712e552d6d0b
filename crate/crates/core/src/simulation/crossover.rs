//! Where the MBR regret bound drops below the MAP regret bound.

use crate::bounds::{bound_gap, case2_threshold, crossover_case2, crossover_case3, map_bound_nd, theorem_bound};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverRow {
    pub n: usize,
    pub d_size: usize,
    pub theorem_bound: f64,
    pub map_bound_nd: f64,
    /// `map_bound_nd − theorem_bound`.
    pub difference: f64,
    pub case3: bool,
    /// Predicate agrees with the sign of `difference` (within 1e-12).
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverStudy {
    pub dim: usize,
    pub delta: f64,
    pub rows: Vec<CrossoverRow>,
    /// Smallest `n` satisfying the `|D| → ∞` condition, from the closed form.
    pub case2_analytic: usize,
    /// The same threshold found by scanning `n` upward.
    pub case2_scanned: Option<usize>,
}

impl CrossoverStudy {
    pub fn disagreements(&self) -> usize {
        self.rows.iter().filter(|r| !r.consistent).count()
    }
}

/// Smallest `n ≤ n_max` for which the case-2 condition holds.
pub fn case2_scan(dim: usize, delta: f64, n_max: usize) -> Result<Option<usize>> {
    for n in 1..=n_max {
        if crossover_case2(n, dim, delta)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

pub fn run_crossover_study(
    n_grid: &[usize],
    d_grid: &[usize],
    dim: usize,
    delta: f64,
    n_max: usize,
) -> Result<CrossoverStudy> {
    if n_grid.is_empty() || d_grid.is_empty() {
        return Err(Error::InvalidSpec("crossover grids must not be empty".into()));
    }
    let mut rows = Vec::with_capacity(n_grid.len() * d_grid.len());
    for &n in n_grid {
        for &d_size in d_grid {
            let mbr = theorem_bound(n, d_size, dim, delta)?;
            let map = map_bound_nd(n, d_size, delta)?;
            let difference = bound_gap(n, d_size, dim, delta)?;
            let case3 = crossover_case3(n, d_size, dim, delta)?;
            let consistent = difference.abs() <= 1e-12 || case3 == (difference >= 0.0);
            rows.push(CrossoverRow {
                n,
                d_size,
                theorem_bound: mbr,
                map_bound_nd: map,
                difference,
                case3,
                consistent,
            });
        }
    }
    Ok(CrossoverStudy {
        dim,
        delta,
        rows,
        case2_analytic: case2_threshold(dim, delta)?,
        case2_scanned: case2_scan(dim, delta, n_max)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_consistent_and_threshold_matches() {
        let grid: Vec<usize> = (1..=20).map(|k| k * 25).collect();
        let s = run_crossover_study(&grid, &grid, 4, 0.1, 10_000).unwrap();
        assert_eq!(s.rows.len(), 400);
        assert_eq!(s.disagreements(), 0);
        assert_eq!(s.case2_analytic, 196);
        assert_eq!(s.case2_scanned, Some(196));
    }

    #[test]
    fn larger_dimension_shifts_threshold_right() {
        let mut last = 0;
        for dim in [4usize, 8, 16, 32, 64] {
            let t = case2_scan(dim, 0.1, 1_000_000).unwrap().unwrap();
            assert!(t > last);
            last = t;
        }
    }
}
