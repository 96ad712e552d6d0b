//! Finite hypothesis sets and categorical distributions over them.
//!
//! A [`HypothesisSpace`] is just an indexed set `0..size` with optional
//! display labels. [`Categorical`] distributions, [`SampleSet`]s and utility
//! models all refer to a space by index, so the heavy lifting is plain
//! `Vec<f64>` arithmetic.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Absolute tolerance on the total mass of a [`Categorical`].
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HypothesisSpace {
    size: usize,
    labels: Option<Vec<String>>,
}

impl HypothesisSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSpace("size must be >= 1".into()));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSpace("size must be >= 1".into()));
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate label {l:?}")));
            }
        }
        Ok(Self {
            size: labels.len(),
            labels: Some(labels),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display name of hypothesis `index` (its label, or the index itself).
    pub fn label(&self, index: usize) -> String {
        match &self.labels {
            Some(ls) => ls[index].clone(),
            None => index.to_string(),
        }
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.size {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                size: self.size,
            })
        }
    }
}

fn same_space(a: &Arc<HypothesisSpace>, b: &Arc<HypothesisSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A probability vector over a [`HypothesisSpace`].
#[derive(Debug, Clone)]
pub struct Categorical {
    space: Arc<HypothesisSpace>,
    probs: Vec<f64>,
}

impl Categorical {
    pub fn new(space: Arc<HypothesisSpace>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != space.size() {
            return Err(Error::InvalidDistribution(format!(
                "expected {} probabilities, got {}",
                space.size(),
                probs.len()
            )));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "probability at index {i} is {p}; entries must be finite and >= 0"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1 (normalization violated)"
            )));
        }
        Ok(Self { space, probs })
    }

    /// Build on a fresh unlabelled space of size `probs.len()`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let space = Arc::new(HypothesisSpace::new(probs.len())?);
        Self::new(space, probs)
    }

    /// Normalize nonnegative weights into a distribution on `space`.
    pub fn from_weights(space: Arc<HypothesisSpace>, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "weights must have positive finite total, got {total}"
            )));
        }
        let probs = weights.iter().map(|w| w / total).collect();
        Self::new(space, probs)
    }

    pub fn uniform(space: Arc<HypothesisSpace>) -> Self {
        let n = space.size();
        Self {
            probs: vec![1.0 / n as f64; n],
            space,
        }
    }

    pub fn point_mass(space: Arc<HypothesisSpace>, index: usize) -> Result<Self> {
        space.check_index(index)?;
        let mut probs = vec![0.0; space.size()];
        probs[index] = 1.0;
        Ok(Self { space, probs })
    }

    pub fn space(&self) -> &Arc<HypothesisSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// Indices with strictly positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.probs.len()).filter(|&i| self.probs[i] > 0.0).collect()
    }

    pub fn check_same_space(&self, other: &Categorical) -> Result<()> {
        if same_space(&self.space, &other.space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }

    /// Total-variation distance `½ Σ |p − q|`.
    pub fn total_variation(&self, other: &Categorical) -> Result<f64> {
        self.check_same_space(other)?;
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>())
    }

    /// Read the `index,probability` text format.
    ///
    /// Every index in `0..N` must appear exactly once. Because files carry a
    /// finite number of digits, the total may deviate from 1 by up to `1e-9`;
    /// the probabilities are then renormalized.
    pub fn read_from(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::File {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim().replace(' ', "") == "index,probability" => {}
            _ => {
                return Err(Error::InvalidDistribution(
                    "missing header `index,probability`".into(),
                ))
            }
        }
        let mut entries = Vec::new();
        for (lineno, line) in lines {
            let bad = |m: String| Error::InvalidDistribution(format!("line {}: {m}", lineno + 1));
            let (idx, p) = line
                .split_once(',')
                .ok_or_else(|| bad("expected `index,probability`".into()))?;
            let idx: usize = idx
                .trim()
                .parse()
                .map_err(|e| bad(format!("bad index {idx:?}: {e}")))?;
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|e| bad(format!("bad probability {p:?}: {e}")))?;
            entries.push((idx, p));
        }
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("no rows".into()));
        }
        let n = entries.len();
        let mut probs = vec![f64::NAN; n];
        for (idx, p) in entries {
            if idx >= n {
                return Err(Error::InvalidDistribution(format!(
                    "index {idx} out of range for {n} rows"
                )));
            }
            if !probs[idx].is_nan() {
                return Err(Error::InvalidDistribution(format!("duplicate index {idx}")));
            }
            probs[idx] = p;
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "probability {p} is negative or not finite"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1 (normalization violated)"
            )));
        }
        let space = Arc::new(HypothesisSpace::new(n)?);
        Self::from_weights(space, &probs)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("index,probability\n");
        for (i, p) in self.probs.iter().enumerate() {
            let _ = writeln!(out, "{i},{p:.16e}");
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Mode with lowest-index tie-break.
    pub fn argmax(&self) -> usize {
        argmax_lowest(&self.probs)
    }
}

/// Index of the maximum entry; ties go to the lowest index.
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Draws from a distribution, with the seed that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    space: Arc<HypothesisSpace>,
    indices: Vec<usize>,
    origin_seed: u64,
}

impl SampleSet {
    pub fn new(space: Arc<HypothesisSpace>, indices: Vec<usize>, origin_seed: u64) -> Result<Self> {
        for &i in &indices {
            space.check_index(i)?;
        }
        Ok(Self {
            space,
            indices,
            origin_seed,
        })
    }

    pub fn space(&self) -> &Arc<HypothesisSpace> {
        &self.space
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn origin_seed(&self) -> u64 {
        self.origin_seed
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Occurrence count per hypothesis (length = space size).
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.space.size()];
        for &i in &self.indices {
            counts[i] += 1;
        }
        counts
    }

    /// Distinct hypotheses present, ascending.
    pub fn distinct(&self) -> Vec<usize> {
        let counts = self.counts();
        (0..counts.len()).filter(|&i| counts[i] > 0).collect()
    }

    /// The first `len` draws. Samples are sequential, so a prefix of
    /// `sample(p, N, s)` equals `sample(p, len, s)`.
    pub fn prefix(&self, len: usize) -> SampleSet {
        SampleSet {
            space: self.space.clone(),
            indices: self.indices[..len.min(self.indices.len())].to_vec(),
            origin_seed: self.origin_seed,
        }
    }
}

/// Inverse-CDF sampler over cumulative sums.
pub struct Sampler {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl Sampler {
    pub fn new(dist: &Categorical) -> Self {
        let mut acc = 0.0;
        let cdf: Vec<f64> = dist
            .probs()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let last_positive = dist.probs().iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self { cdf, last_positive }
    }

    pub fn draw(&self, rng: &mut impl rand::Rng) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let u: f64 = rng.random::<f64>() * total;
        // First index whose cumulative mass exceeds u; zero-mass entries never
        // qualify because their cdf equals the previous entry's.
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.last_positive)
    }
}

/// `count` i.i.d. draws from `dist`, reproducible from `seed`.
pub fn sample(dist: &Categorical, count: usize, seed: u64) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::EmptySampleRequest);
    }
    let sampler = Sampler::new(dist);
    let mut rng = rng_from_seed(seed);
    let indices = (0..count).map(|_| sampler.draw(&mut rng)).collect();
    Ok(SampleSet {
        space: dist.space().clone(),
        indices,
        origin_seed: seed,
    })
}

/// Frequency distribution of a sample: `P̂(y) = count(y) / |samples|`.
pub fn empirical_distribution(samples: &SampleSet) -> Result<Categorical> {
    if samples.is_empty() {
        return Err(Error::EmptySampleRequest);
    }
    let n = samples.len() as f64;
    let probs: Vec<f64> = samples.counts().into_iter().map(|c| c as f64 / n).collect();
    let total: f64 = probs.iter().sum();
    // Sum of k/n terms can be off by a few ulps; nudge back onto the simplex.
    let probs = if (total - 1.0).abs() > MASS_TOLERANCE {
        probs.iter().map(|p| p / total).collect()
    } else {
        probs
    };
    Categorical::new(samples.space().clone(), probs)
}

/// `P^t(y) ∝ exp(P(y) / t)`.
///
/// This exponentiates probabilities, not logits, so `t = 1` is *not* the
/// identity: every hypothesis, including zero-probability ones, receives
/// mass. As `t → ∞` the result tends to uniform.
pub fn temperature_transform(dist: &Categorical, t: f64) -> Result<Categorical> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidTemperature(t));
    }
    let max = dist.probs().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = dist.probs().iter().map(|p| ((p - max) / t).exp()).collect();
    Categorical::from_weights(dist.space().clone(), &weights)
}

/// Generator family for a synthetic human distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HumanFamily {
    /// `P(k) ∝ 1 / (k+1)^s`, deterministic.
    Zipf { s: f64 },
    /// Symmetric Dirichlet with concentration `alpha`.
    Dirichlet { alpha: f64 },
}

impl Default for HumanFamily {
    fn default() -> Self {
        HumanFamily::Zipf { s: 1.0 }
    }
}

impl HumanFamily {
    pub fn name(&self) -> &'static str {
        match self {
            HumanFamily::Zipf { .. } => "zipf",
            HumanFamily::Dirichlet { .. } => "dirichlet",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            HumanFamily::Zipf { s } => s,
            HumanFamily::Dirichlet { alpha } => alpha,
        }
    }

    pub fn from_name(name: &str, param: f64) -> Result<Self> {
        match name {
            "zipf" => Ok(HumanFamily::Zipf { s: param }),
            "dirichlet" => Ok(HumanFamily::Dirichlet { alpha: param }),
            other => Err(Error::param(
                "human_family",
                format!("unknown family {other:?} (expected zipf or dirichlet)"),
            )),
        }
    }
}

pub fn make_human_distribution(size: usize, family: HumanFamily, seed: u64) -> Result<Categorical> {
    let space = Arc::new(HypothesisSpace::new(size)?);
    let param = family.param();
    if !(param > 0.0 && param.is_finite()) {
        return Err(Error::param(
            "human_family",
            format!("{} parameter must be positive, got {param}", family.name()),
        ));
    }
    if size == 1 {
        return Categorical::point_mass(space, 0);
    }
    let weights: Vec<f64> = match family {
        HumanFamily::Zipf { s } => (1..=size).map(|k| (k as f64).powf(-s)).collect(),
        HumanFamily::Dirichlet { alpha } => {
            let gamma = Gamma::new(alpha, 1.0).map_err(|e| Error::param("alpha", e.to_string()))?;
            let mut rng = rng_from_seed(seed);
            let mut w: Vec<f64> = (0..size).map(|_| gamma.sample(&mut rng)).collect();
            if w.iter().sum::<f64>() <= 0.0 {
                // All draws underflowed (tiny alpha): fall back to a single atom.
                w[0] = 1.0;
            }
            w
        }
    };
    Categorical::from_weights(space, &weights)
}
