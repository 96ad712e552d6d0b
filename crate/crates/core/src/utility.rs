//! Pairwise utility models `u(y, y') ∈ [0, u_max]`.
//!
//! Two concrete representations are provided: [`EmbeddingUtility`], where
//! `u(y, y') = α(y)ᵀα(y')`, and the dense [`MatrixUtility`]. Both implement
//! [`Utility`], which is what the decoders consume.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hypothesis_space::Categorical;
use crate::rng::rng_from_seed;

/// Largest |𝒴| for which [`default_cost`] will run the exhaustive tightened
/// construction (which costs `O(|𝒴|³)` utility evaluations).
pub const DEFAULT_TIGHTENED_LIMIT: usize = 600;

pub trait Utility: Send + Sync {
    fn size(&self) -> usize;

    fn u_max(&self) -> f64;

    /// `u(y, y')` without bounds checking; panics on out-of-range indices.
    fn value(&self, y: usize, y_ref: usize) -> f64;

    fn utility(&self, y: usize, y_ref: usize) -> Result<f64> {
        let size = self.size();
        for index in [y, y_ref] {
            if index >= size {
                return Err(Error::IndexOutOfRange { index, size });
            }
        }
        Ok(self.value(y, y_ref))
    }

    /// For each target `y`, `Σ_k w_k · u(y, r_k)` over the sparse weights
    /// `(r_k, w_k)`.
    fn weighted_scores(&self, targets: &[usize], weights: &[(usize, f64)]) -> Vec<f64> {
        targets
            .iter()
            .map(|&y| weights.iter().map(|&(r, w)| w * self.value(y, r)).sum())
            .collect()
    }
}

impl<U: Utility + ?Sized> Utility for &U {
    fn size(&self) -> usize {
        (**self).size()
    }
    fn u_max(&self) -> f64 {
        (**self).u_max()
    }
    fn value(&self, y: usize, y_ref: usize) -> f64 {
        (**self).value(y, y_ref)
    }
    fn weighted_scores(&self, targets: &[usize], weights: &[(usize, f64)]) -> Vec<f64> {
        (**self).weighted_scores(targets, weights)
    }
}

fn check_u_max(u_max: f64) -> Result<()> {
    if u_max > 0.0 && u_max <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("u_max", format!("must be in (0, 1], got {u_max}")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Inner-product utility over nonnegative embeddings.
#[derive(Debug, Clone)]
pub struct EmbeddingUtility {
    dim: usize,
    u_max: f64,
    /// Row-major `size × dim`.
    embeddings: Vec<f64>,
}

impl EmbeddingUtility {
    /// Wrap explicit embeddings. `u_max` is taken to be the largest norm,
    /// which must lie in (0, 1]; every pairwise inner product must be
    /// nonnegative.
    pub fn from_embeddings(vectors: &[Vec<f64>]) -> Result<Self> {
        let size = vectors.len();
        if size == 0 {
            return Err(Error::InvalidUtility("no embeddings".into()));
        }
        let dim = vectors[0].len();
        if dim == 0 || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidUtility(
                "embeddings must share a positive dimension".into(),
            ));
        }
        let u_max = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
        check_u_max(u_max)?;
        for (i, a) in vectors.iter().enumerate() {
            for b in &vectors[i..] {
                if dot(a, b) < 0.0 {
                    return Err(Error::InvalidUtility(
                        "negative inner product between embeddings".into(),
                    ));
                }
            }
        }
        Ok(Self {
            dim,
            u_max,
            embeddings: vectors.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embedding(&self, y: usize) -> &[f64] {
        &self.embeddings[y * self.dim..(y + 1) * self.dim]
    }

    /// Materialize as a dense matrix.
    pub fn to_matrix(&self) -> MatrixUtility {
        let n = self.size();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] = self.value(i, j);
            }
        }
        MatrixUtility {
            size: n,
            values,
            u_max: self.u_max,
        }
    }
}

impl Utility for EmbeddingUtility {
    fn size(&self) -> usize {
        self.embeddings.len() / self.dim
    }

    fn u_max(&self) -> f64 {
        self.u_max
    }

    fn value(&self, y: usize, y_ref: usize) -> f64 {
        dot(self.embedding(y), self.embedding(y_ref))
    }

    // Σ_k w_k α(y)ᵀα(r_k) = α(y)ᵀ(Σ_k w_k α(r_k)): O((|targets| + |weights|)·d).
    fn weighted_scores(&self, targets: &[usize], weights: &[(usize, f64)]) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for &(r, w) in weights {
            for (m, a) in mean.iter_mut().zip(self.embedding(r)) {
                *m += w * a;
            }
        }
        targets.iter().map(|&y| dot(self.embedding(y), &mean)).collect()
    }
}

/// Embeddings drawn uniformly from `[0,1]^dim`, then scaled so that the
/// largest norm equals `u_max`. Nonnegative coordinates keep every inner
/// product in `[0, u_max²] ⊆ [0, u_max]`.
pub fn build_embedding_utility(size: usize, dim: usize, u_max: f64, seed: u64) -> Result<EmbeddingUtility> {
    if size == 0 {
        return Err(Error::param("size", "must be >= 1"));
    }
    if dim == 0 {
        return Err(Error::param("dim", "must be >= 1"));
    }
    check_u_max(u_max)?;
    let mut rng = rng_from_seed(seed);
    let mut embeddings: Vec<f64> = (0..size * dim).map(|_| rng.random::<f64>()).collect();
    let max_norm = embeddings
        .chunks(dim)
        .map(norm)
        .fold(0.0, f64::max);
    if max_norm <= 0.0 {
        return Err(Error::InvalidUtility("degenerate all-zero embeddings".into()));
    }
    let scale = u_max / max_norm;
    embeddings.iter_mut().for_each(|x| *x *= scale);
    Ok(EmbeddingUtility {
        dim,
        u_max,
        embeddings,
    })
}

/// Dense `|𝒴| × |𝒴|` utility table.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixUtility {
    size: usize,
    values: Vec<f64>,
    u_max: f64,
}

impl MatrixUtility {
    pub fn new(size: usize, values: Vec<f64>, u_max: f64) -> Result<Self> {
        if size == 0 {
            return Err(Error::param("size", "must be >= 1"));
        }
        if values.len() != size * size {
            return Err(Error::InvalidUtility(format!(
                "expected {} entries for a {size}x{size} matrix, got {}",
                size * size,
                values.len()
            )));
        }
        check_u_max(u_max)?;
        if let Some(pos) = values
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0 || *v > u_max)
        {
            return Err(Error::InvalidUtility(format!(
                "entry ({}, {}) = {} outside [0, {u_max}]",
                pos / size,
                pos % size,
                values[pos]
            )));
        }
        Ok(Self { size, values, u_max })
    }

    pub fn from_rows(rows: &[Vec<f64>], u_max: f64) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidUtility("matrix must be square".into()));
        }
        Self::new(size, rows.concat(), u_max)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    /// Largest `|u(i,j) − u(j,i)|`.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.size;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self) -> bool {
        self.max_asymmetry() == 0.0
    }

    /// Smallest eigenvalue of the (symmetric part of the) matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_row_slice(self.size, self.size, &self.values);
        let sym = (&m + m.transpose()) * 0.5;
        sym.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn read_from(path: &Path, u_max: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::File {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let rows = parse_dense(&text).map_err(|e| e.in_file(path))?;
        Self::from_rows(&rows, u_max).map_err(|e| e.in_file(path))
    }

    pub fn to_text(&self) -> String {
        write_dense(self.size, self.size, &self.values)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

impl Utility for MatrixUtility {
    fn size(&self) -> usize {
        self.size
    }

    fn u_max(&self) -> f64 {
        self.u_max
    }

    fn value(&self, y: usize, y_ref: usize) -> f64 {
        self.values[y * self.size + y_ref]
    }
}

/// Dense row-major text: one row per line, comma-separated, 12 significant
/// digits.
pub fn write_dense(rows: usize, cols: usize, values: &[f64]) -> String {
    let mut out = String::new();
    for i in 0..rows {
        for j in 0..cols {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{:.11e}", values[i * cols + j]);
        }
        out.push('\n');
    }
    out
}

pub fn parse_dense(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(lineno, line)| {
            line.split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|e| {
                        Error::InvalidUtility(format!("line {}: bad number {cell:?}: {e}", lineno + 1))
                    })
                })
                .collect()
        })
        .collect()
}

/// Matrix utility in the style of the simulation setup: symmetric, unit
/// diagonal, off-diagonal entries drawn from `U[0, 1−β]` plus a boost
/// `β·min(P(i), P(j)) / max_k P(k)` favouring likely hypotheses, clipped to
/// `[0, 1]`.
pub fn appendix_i_matrix(human: &Categorical, beta: f64, seed: u64) -> Result<MatrixUtility> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::param("beta", format!("must be in [0, 1], got {beta}")));
    }
    let n = human.len();
    let p_max = human.probs().iter().cloned().fold(0.0, f64::max);
    let mut rng = rng_from_seed(seed);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        values[i * n + i] = 1.0;
        for j in i + 1..n {
            let base = (1.0 - beta) * rng.random::<f64>();
            let boost = beta * human.prob(i).min(human.prob(j)) / p_max;
            let v = (base + boost).clamp(0.0, 1.0);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    MatrixUtility::new(n, values, 1.0)
}

/// `u'(y, y') = (u(y, y') + u(y', y)) / 2`.
pub fn symmetrize(model: &MatrixUtility) -> MatrixUtility {
    let n = model.size;
    let mut values = model.values.clone();
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (model.get(i, j) + model.get(j, i));
            values[i * n + j] = m;
            values[j * n + i] = m;
        }
    }
    MatrixUtility {
        size: n,
        values,
        u_max: model.u_max,
    }
}

/// Eigenvalue floor accepted by [`psd_project`].
pub const PSD_TOLERANCE: f64 = 1e-9;

const PSD_MAX_ROUNDS: usize = 1000;

fn clamp_eigenvalues(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let clamped = eig.eigenvalues.map(|l| l.max(0.0));
    let q = &eig.eigenvectors;
    let rebuilt = q * DMatrix::from_diagonal(&clamped) * q.transpose();
    (&rebuilt + rebuilt.transpose()) * 0.5
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// PSD repair: clamp negative eigenvalues to zero, reconstruct, clip entries
/// back to `[0, u_max]`.
///
/// Clipping can push eigenvalues below zero again, so the clamp/clip pair is
/// repeated with Dykstra corrections (converging to the nearest matrix that is
/// both PSD and inside the box) until the smallest eigenvalue of the clipped
/// matrix is at least `-PSD_TOLERANCE`. When one round suffices the result is
/// exactly the plain clamp-and-clip.
pub fn psd_project(model: &MatrixUtility) -> Result<MatrixUtility> {
    let asym = model.max_asymmetry();
    if asym > 0.0 {
        return Err(Error::NotSymmetric(asym));
    }
    let n = model.size;
    let u_max = model.u_max;
    let start = DMatrix::from_row_slice(n, n, &model.values);
    if min_eig(&start) >= 0.0 {
        return Ok(model.clone());
    }
    let mut x = start;
    let mut p = DMatrix::<f64>::zeros(n, n);
    let mut q = DMatrix::<f64>::zeros(n, n);
    for _ in 0..PSD_MAX_ROUNDS {
        let y = clamp_eigenvalues(&(&x + &p));
        p = &x + &p - &y;
        let shifted = &y + &q;
        let next = shifted.map(|v| v.clamp(0.0, u_max));
        q = shifted - &next;
        x = next;
        if min_eig(&x) >= -PSD_TOLERANCE {
            break;
        }
    }
    if min_eig(&x) < -PSD_TOLERANCE {
        return Err(Error::Solver(format!(
            "PSD repair did not reach eigenvalue floor -{PSD_TOLERANCE:e}"
        )));
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = (0.5 * (x[(i, j)] + x[(j, i)])).clamp(0.0, u_max);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(MatrixUtility { size: n, values, u_max })
}

/// How [`default_cost`] builds the Lipschitz cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostMode {
    /// `C(y', y'') = u_max` off the diagonal.
    #[default]
    Trivial,
    /// `C(y', y'') = max_y |u(y, y') − u(y, y'')|`.
    Tightened,
}

impl CostMode {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "trivial" => Ok(CostMode::Trivial),
            "tightened" => Ok(CostMode::Tightened),
            other => Err(Error::param(
                "cost_mode",
                format!("unknown mode {other:?} (expected trivial or tightened)"),
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CostMode::Trivial => "trivial",
            CostMode::Tightened => "tightened",
        }
    }
}

/// Nonnegative, zero-diagonal cost matrix bounding utility differences.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzCost {
    size: usize,
    values: Vec<f64>,
}

impl LipschitzCost {
    pub fn new(size: usize, values: Vec<f64>) -> Result<Self> {
        if size == 0 || values.len() != size * size {
            return Err(Error::InvalidUtility(format!(
                "cost matrix must be {size}x{size}"
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidUtility(format!(
                "cost entry ({}, {}) = {} is negative or not finite",
                pos / size,
                pos % size,
                values[pos]
            )));
        }
        if let Some(i) = (0..size).find(|&i| values[i * size + i] != 0.0) {
            return Err(Error::InvalidUtility(format!("cost diagonal ({i}, {i}) must be 0")));
        }
        Ok(Self { size, values })
    }

    /// Any nonnegative matrix (zero diagonal not enforced) for use as a raw
    /// transport cost.
    pub fn arbitrary(size: usize, values: Vec<f64>) -> Result<Self> {
        if size == 0 || values.len() != size * size {
            return Err(Error::InvalidUtility(format!(
                "cost matrix must be {size}x{size}"
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidUtility("cost entries must be finite and >= 0".into()));
        }
        Ok(Self { size, values })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            size: self.size,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Exhaustively check `|u(y,y') − u(y,y'')| ≤ C(y',y'')` over every triple.
    /// Returns the largest violation (0 when the inequality holds).
    pub fn max_violation(&self, utility: &dyn Utility) -> f64 {
        let n = self.size;
        let mut worst = 0.0f64;
        for y1 in 0..n {
            for y2 in 0..n {
                let c = self.get(y1, y2);
                for y in 0..n {
                    let gap = (utility.value(y, y1) - utility.value(y, y2)).abs() - c;
                    worst = worst.max(gap);
                }
            }
        }
        worst
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::File {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let rows = parse_dense(&text).map_err(|e| e.in_file(path))?;
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::InvalidUtility("cost matrix must be square".into()).in_file(path));
        }
        Self::arbitrary(size, rows.concat()).map_err(|e| e.in_file(path))
    }
}

pub fn default_cost(model: &dyn Utility, mode: CostMode, tightened_limit: usize) -> Result<LipschitzCost> {
    let n = model.size();
    let mut values = vec![0.0; n * n];
    match mode {
        CostMode::Trivial => {
            let u_max = model.u_max();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        values[i * n + j] = u_max;
                    }
                }
            }
        }
        CostMode::Tightened => {
            if n > tightened_limit {
                return Err(Error::CostTooLarge {
                    size: n,
                    limit: tightened_limit,
                });
            }
            // Column y' of the utility, contiguous, for the inner max.
            let columns: Vec<Vec<f64>> = (0..n)
                .map(|c| (0..n).map(|y| model.value(y, c)).collect())
                .collect();
            for i in 0..n {
                for j in i + 1..n {
                    let c = columns[i]
                        .iter()
                        .zip(&columns[j])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    values[i * n + j] = c;
                    values[j * n + i] = c;
                }
            }
        }
    }
    LipschitzCost::new(n, values)
}

/// A proxy utility `u'` built from perturbed embeddings `α'`, alongside the
/// true utility.
#[derive(Debug, Clone)]
pub struct PerturbedUtility {
    base: EmbeddingUtility,
    perturbed: EmbeddingUtility,
    /// `max_{y,y'} ‖α(y) − α'(y')‖` over all cross pairs.
    alpha_err: f64,
    /// `max_y ‖α(y) − α'(y)‖` over matched pairs.
    alpha_err_matched: f64,
}

impl PerturbedUtility {
    pub fn base(&self) -> &EmbeddingUtility {
        &self.base
    }

    /// The proxy utility `u'(y, y') = α'(y)ᵀα'(y')`.
    pub fn proxy(&self) -> &EmbeddingUtility {
        &self.perturbed
    }

    pub fn alpha_err(&self) -> f64 {
        self.alpha_err
    }

    pub fn alpha_err_matched(&self) -> f64 {
        self.alpha_err_matched
    }

    /// `‖α(y) − α'(y)‖`.
    pub fn embedding_error(&self, y: usize) -> f64 {
        distance(self.base.embedding(y), self.perturbed.embedding(y))
    }
}

/// `α'(y) = max(0, α(y) + σ·z)` with `z ~ N(0, I)`, rescaled per vector so
/// that `‖α'(y)‖ ≤ u_max`.
pub fn perturb_embeddings(base: &EmbeddingUtility, noise_scale: f64, seed: u64) -> Result<PerturbedUtility> {
    if !(noise_scale >= 0.0 && noise_scale.is_finite()) {
        return Err(Error::param(
            "noise_scale",
            format!("must be finite and >= 0, got {noise_scale}"),
        ));
    }
    let dim = base.dim;
    let u_max = base.u_max;
    let mut rng = rng_from_seed(seed);
    let mut perturbed = base.embeddings.clone();
    for chunk in perturbed.chunks_mut(dim) {
        for x in chunk.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x = (*x + noise_scale * z).max(0.0);
        }
        let nrm = norm(chunk);
        if nrm > u_max {
            let s = u_max / nrm;
            chunk.iter_mut().for_each(|x| *x *= s);
        }
    }
    let perturbed = EmbeddingUtility {
        dim,
        u_max,
        embeddings: perturbed,
    };
    let n = base.size();
    let mut alpha_err = 0.0f64;
    let mut alpha_err_matched = 0.0f64;
    for y in 0..n {
        let a = base.embedding(y);
        for y2 in 0..n {
            let d = distance(a, perturbed.embedding(y2));
            alpha_err = alpha_err.max(d);
            if y == y2 {
                alpha_err_matched = alpha_err_matched.max(d);
            }
        }
    }
    Ok(PerturbedUtility {
        base: base.clone(),
        perturbed,
        alpha_err,
        alpha_err_matched,
    })
}

/// Owned utility of either representation.
#[derive(Debug, Clone)]
pub enum UtilityModel {
    Embedding(EmbeddingUtility),
    Matrix(MatrixUtility),
}

impl UtilityModel {
    fn inner(&self) -> &dyn Utility {
        match self {
            UtilityModel::Embedding(e) => e,
            UtilityModel::Matrix(m) => m,
        }
    }

    pub fn as_embedding(&self) -> Option<&EmbeddingUtility> {
        match self {
            UtilityModel::Embedding(e) => Some(e),
            UtilityModel::Matrix(_) => None,
        }
    }
}

impl Utility for UtilityModel {
    fn size(&self) -> usize {
        self.inner().size()
    }
    fn u_max(&self) -> f64 {
        self.inner().u_max()
    }
    fn value(&self, y: usize, y_ref: usize) -> f64 {
        self.inner().value(y, y_ref)
    }
    fn weighted_scores(&self, targets: &[usize], weights: &[(usize, f64)]) -> Vec<f64> {
        self.inner().weighted_scores(targets, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis_space::make_human_distribution;
    use crate::hypothesis_space::HumanFamily;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn embedding_constructor_postconditions() {
        let u = build_embedding_utility(50, 4, 1.0, 3).unwrap();
        let max_norm = (0..50).map(|y| norm(u.embedding(y))).fold(0.0, f64::max);
        assert_abs_diff_eq!(max_norm, 1.0, epsilon = 1e-9);
        for a in 0..50 {
            for b in 0..50 {
                let v = u.value(a, b);
                assert!((0.0..=1.0).contains(&v));
                assert_eq!(v, u.value(b, a));
            }
        }
        assert!(build_embedding_utility(0, 4, 1.0, 0).is_err());
        assert!(build_embedding_utility(3, 0, 1.0, 0).is_err());
        assert!(build_embedding_utility(3, 4, 1.5, 0).is_err());
    }

    #[test]
    fn embedding_algebra() {
        let s = 0.8 / 2f64.sqrt();
        let u = EmbeddingUtility::from_embeddings(&[vec![s, s], vec![s, s]]).unwrap();
        assert_abs_diff_eq!(u.value(0, 1), 0.64, epsilon = 1e-15);
        let u = EmbeddingUtility::from_embeddings(&[vec![0.5, 0.0], vec![0.0, 0.9]]).unwrap();
        assert_eq!(u.value(0, 1), 0.0);
        assert!(EmbeddingUtility::from_embeddings(&[vec![0.5, 0.0], vec![-0.5, 0.0]]).is_err());
    }

    #[test]
    fn embedding_matches_bruteforce_dot() {
        let u = build_embedding_utility(20, 6, 0.9, 17).unwrap();
        for a in 0..20 {
            for b in 0..20 {
                let mut acc = 0.0;
                for k in 0..6 {
                    acc += u.embedding(a)[k] * u.embedding(b)[k];
                }
                assert_abs_diff_eq!(u.utility(a, b).unwrap(), acc, epsilon = 1e-15);
            }
        }
        assert!(matches!(u.utility(20, 0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn embedding_weighted_scores_match_default() {
        let u = build_embedding_utility(15, 4, 1.0, 2).unwrap();
        let m = u.to_matrix();
        let weights = vec![(1, 0.25), (4, 0.5), (9, 0.25)];
        let targets: Vec<usize> = (0..15).collect();
        let fast = u.weighted_scores(&targets, &weights);
        let slow = m.weighted_scores(&targets, &weights);
        for (a, b) in fast.iter().zip(&slow) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn appendix_i_matrix_properties() {
        let h = make_human_distribution(30, HumanFamily::Zipf { s: 1.0 }, 0).unwrap();
        let m = appendix_i_matrix(&h, 0.2, 4).unwrap();
        for i in 0..30 {
            assert_eq!(m.utility(i, i).unwrap(), 1.0);
        }
        assert!(m.is_symmetric());
        assert!(m.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn symmetrize_examples() {
        let m = MatrixUtility::from_rows(&[vec![1.0, 0.2], vec![0.6, 1.0]], 1.0).unwrap();
        let s = symmetrize(&m);
        assert_abs_diff_eq!(s.get(0, 1), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(s.get(1, 0), 0.4, epsilon = 1e-15);
        assert_eq!(s.max_asymmetry(), 0.0);
        let sym = MatrixUtility::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.0]], 1.0).unwrap();
        assert_eq!(symmetrize(&sym), sym);
    }

    #[test]
    fn psd_projection_examples() {
        let psd = MatrixUtility::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]], 1.0).unwrap();
        let out = psd_project(&psd).unwrap();
        for (a, b) in out.values().iter().zip(psd.values()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        }

        let indefinite = MatrixUtility::from_rows(&[vec![1.0, 0.9], vec![0.9, 0.1]], 1.0).unwrap();
        // det = 0.1 - 0.81 < 0, so one eigenvalue is negative.
        assert!(indefinite.min_eigenvalue() < 0.0);
        let out = psd_project(&indefinite).unwrap();
        // Independent 2x2 eigenvalue formula.
        let (a, b, d) = (out.get(0, 0), out.get(0, 1), out.get(1, 1));
        let min_eig = 0.5 * (a + d) - (0.25 * (a - d).powi(2) + b * b).sqrt();
        assert!(min_eig >= -1e-9, "{min_eig}");

        let id = MatrixUtility::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], 1.0).unwrap();
        assert_eq!(psd_project(&id).unwrap(), id);

        let asym = MatrixUtility::from_rows(&[vec![1.0, 0.2], vec![0.6, 1.0]], 1.0).unwrap();
        assert!(matches!(psd_project(&asym), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn trivial_cost() {
        let m = MatrixUtility::from_rows(
            &[vec![1.0, 0.2, 0.3], vec![0.2, 1.0, 0.4], vec![0.3, 0.4, 1.0]],
            1.0,
        )
        .unwrap();
        let c = default_cost(&m, CostMode::Trivial, DEFAULT_TIGHTENED_LIMIT).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c.get(i, j), if i == j { 0.0 } else { 1.0 });
            }
        }
        assert_eq!(c.max_violation(&m), 0.0);
    }

    #[test]
    fn tightened_cost_is_exact_and_bounded() {
        let u = build_embedding_utility(25, 4, 1.0, 8).unwrap();
        let c = default_cost(&u, CostMode::Tightened, DEFAULT_TIGHTENED_LIMIT).unwrap();
        let trivial = default_cost(&u, CostMode::Trivial, DEFAULT_TIGHTENED_LIMIT).unwrap();
        // Brute-force triple loop: inequality holds, and is tight for every pair.
        for y1 in 0..25 {
            for y2 in 0..25 {
                let mut tight = 0.0f64;
                for y in 0..25 {
                    let gap = (u.value(y, y1) - u.value(y, y2)).abs();
                    assert!(gap <= c.get(y1, y2));
                    tight = tight.max(gap);
                }
                assert_eq!(tight, c.get(y1, y2));
                assert!(c.get(y1, y2) <= trivial.get(y1, y2));
            }
        }
        assert!(matches!(
            default_cost(&u, CostMode::Tightened, 10),
            Err(Error::CostTooLarge { .. })
        ));
    }

    #[test]
    fn perturbation_zero_noise_is_pairwise_spread() {
        let u = build_embedding_utility(12, 4, 1.0, 5).unwrap();
        let p = perturb_embeddings(&u, 0.0, 1).unwrap();
        let mut spread = 0.0f64;
        for a in 0..12 {
            for b in 0..12 {
                spread = spread.max(distance(u.embedding(a), u.embedding(b)));
            }
        }
        assert_eq!(p.alpha_err(), spread);
        assert_eq!(p.alpha_err_matched(), 0.0);

        let one = build_embedding_utility(1, 4, 1.0, 5).unwrap();
        assert_eq!(perturb_embeddings(&one, 0.0, 1).unwrap().alpha_err(), 0.0);
        assert!(perturb_embeddings(&u, -0.1, 1).is_err());
    }

    #[test]
    fn perturbation_error_grows_with_noise() {
        let u = build_embedding_utility(40, 4, 1.0, 6).unwrap();
        let grid = [0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0];
        let runs: Vec<PerturbedUtility> = grid
            .iter()
            .map(|&s| perturb_embeddings(&u, s, 77).unwrap())
            .collect();
        // Projection onto the nonnegative ball moves a point monotonically
        // along a fixed noise ray, so the matched error is nondecreasing.
        let matched: Vec<f64> = runs.iter().map(|r| r.alpha_err_matched()).collect();
        for w in matched.windows(2) {
            assert!(w[1] >= w[0] - 1e-15, "{matched:?}");
        }
        for r in &runs {
            assert!(r.alpha_err() >= r.alpha_err_matched());
        }
        assert!(runs[6].alpha_err() > runs[0].alpha_err());
        let proxy = perturb_embeddings(&u, 0.3, 77).unwrap();
        for y in 0..40 {
            assert!(norm(proxy.proxy().embedding(y)) <= 1.0 + 1e-12);
            assert!(proxy.proxy().embedding(y).iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn dense_text_round_trip() {
        let m = MatrixUtility::from_rows(&[vec![1.0, 0.25], vec![0.125, 1.0]], 1.0).unwrap();
        let rows = parse_dense(&m.to_text()).unwrap();
        assert_eq!(MatrixUtility::from_rows(&rows, 1.0).unwrap(), m);
        assert!(parse_dense("1.0,abc\n").is_err());
    }

    proptest! {
        #[test]
        fn symmetrize_then_project_is_psd(seed in any::<u64>(), n in 2usize..8) {
            let mut rng = rng_from_seed(seed);
            let vals: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
            let m = MatrixUtility::new(n, vals, 1.0).unwrap();
            let s = symmetrize(&m);
            prop_assert_eq!(s.max_asymmetry(), 0.0);
            let p = psd_project(&s).unwrap();
            prop_assert!(p.min_eigenvalue() >= -1e-9);
            prop_assert!(p.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
