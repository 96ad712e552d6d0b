//! Seeded regret-vs-bound sweeps over `n`, `|D|` and `δ`.
//!
//! Each seed is independent: it draws its own human distribution, utility,
//! training set and references from sub-streams of a per-trial seed, so rows
//! are identical regardless of thread count or scheduling.

mod crossover;
mod observation;

use rayon::prelude::*;

use crate::bounds::{BoundInputs, BoundKind, Form};
use crate::decoding::{expected_utilities, run_trial, CandidateSet, ModelSource, TrialSpec};
use crate::error::{Error, Result};
use crate::hypothesis_space::{
    empirical_distribution, make_human_distribution, sample, temperature_transform, Categorical, HumanFamily,
};
use crate::rng::{derive_seed, stream, trial_seed};
use crate::transport::wasserstein;
use crate::utility::{
    appendix_i_matrix, build_embedding_utility, default_cost, perturb_embeddings, CostMode, LipschitzCost,
    UtilityModel, DEFAULT_TIGHTENED_LIMIT,
};

pub use crossover::{case2_scan, run_crossover_study, CrossoverRow, CrossoverStudy};
pub use observation::{run_observation1_probe, ObservationRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UtilityKind {
    /// Inner products of random nonnegative embeddings.
    #[default]
    Embedding,
    /// Symmetric matrix with unit diagonal, boosted toward likely outputs.
    AppendixI,
}

impl UtilityKind {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "embedding" => Ok(UtilityKind::Embedding),
            "appendix_i" | "matrix" => Ok(UtilityKind::AppendixI),
            other => Err(Error::param(
                "utility",
                format!("unknown utility kind `{other}` (expected embedding or appendix_i)"),
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            UtilityKind::Embedding => "embedding",
            UtilityKind::AppendixI => "appendix_i",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub space_size: usize,
    pub dim: usize,
    pub u_max: f64,
    pub human_family: HumanFamily,
    /// Use one human distribution for every seed instead of a fresh one.
    pub fixed_human: bool,
    pub utility_kind: UtilityKind,
    pub beta: f64,
    pub n_grid: Vec<usize>,
    pub d_grid: Vec<usize>,
    pub deltas: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub noise_scales: Vec<f64>,
    pub seeds: usize,
    pub master_seed: u64,
    pub cost_mode: CostMode,
    /// Largest space for which Wasserstein terms are computed.
    pub wd_limit: usize,
    pub tightened_limit: usize,
    pub candidates: CandidateSet,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            space_size: 1000,
            dim: 4,
            u_max: 1.0,
            human_family: HumanFamily::default(),
            fixed_human: false,
            utility_kind: UtilityKind::Embedding,
            beta: 0.1,
            n_grid: vec![25, 50, 100, 200, 400],
            d_grid: vec![5000],
            deltas: vec![0.01, 0.1],
            temperatures: Vec::new(),
            noise_scales: Vec::new(),
            seeds: 100,
            master_seed: 0,
            cost_mode: CostMode::Trivial,
            wd_limit: 2000,
            tightened_limit: DEFAULT_TIGHTENED_LIMIT,
            candidates: CandidateSet::References,
        }
    }
}

fn strictly_increasing<T: PartialOrd>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn check_grid<T: PartialOrd>(name: &'static str, v: &[T], allow_empty: bool) -> Result<()> {
    if v.is_empty() && !allow_empty {
        return Err(Error::InvalidSpec(format!("{name} must not be empty")));
    }
    if !strictly_increasing(v) {
        return Err(Error::InvalidSpec(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.space_size == 0 || self.dim == 0 || self.seeds == 0 {
            return Err(Error::InvalidSpec("space_size, dim and seeds must be at least 1".into()));
        }
        if !(self.u_max > 0.0 && self.u_max <= 1.0) {
            return Err(Error::InvalidSpec(format!("u_max must be in (0,1], got {}", self.u_max)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidSpec(format!("beta must be in [0,1], got {}", self.beta)));
        }
        check_grid("n_grid", &self.n_grid, false)?;
        check_grid("d_grid", &self.d_grid, false)?;
        check_grid("deltas", &self.deltas, false)?;
        check_grid("temperatures", &self.temperatures, true)?;
        check_grid("noise_scales", &self.noise_scales, true)?;
        if self.n_grid[0] == 0 || self.d_grid[0] == 0 {
            return Err(Error::InvalidSpec("grid entries must be at least 1".into()));
        }
        if let Some(d) = self.deltas.iter().find(|&&d| !(d > 0.0 && d < 1.0)) {
            return Err(Error::InvalidDelta(*d));
        }
        if let Some(t) = self.temperatures.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::InvalidTemperature(*t));
        }
        if self.noise_scales.iter().any(|&s| !(s >= 0.0 && s.is_finite())) {
            return Err(Error::InvalidSpec("noise_scales must be finite and >= 0".into()));
        }
        if !self.noise_scales.is_empty() && self.utility_kind != UtilityKind::Embedding {
            return Err(Error::InvalidSpec("noise_scales require the embedding utility".into()));
        }
        Ok(())
    }

    /// Seed of the human distribution for trial `index`.
    fn human_seed(&self, index: usize) -> u64 {
        if self.fixed_human {
            derive_seed(self.master_seed, stream::HUMAN)
        } else {
            derive_seed(trial_seed(self.master_seed, index as u64), stream::HUMAN)
        }
    }
}

/// Whether the Wasserstein terms of a row were computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WdStatus {
    Computed,
    /// Space larger than the configured limit.
    SkippedSize,
    /// The requested cost matrix could not be built (too large).
    SkippedCost,
}

impl WdStatus {
    pub fn name(&self) -> &'static str {
        match self {
            WdStatus::Computed => "ok",
            WdStatus::SkippedSize => "skipped_size",
            WdStatus::SkippedCost => "skipped_cost",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ok" => Some(WdStatus::Computed),
            "skipped_size" => Some(WdStatus::SkippedSize),
            "skipped_cost" => Some(WdStatus::SkippedCost),
            _ => None,
        }
    }
}

/// One (seed, n, |D|, δ, variant) measurement with its bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub n: usize,
    pub d_size: usize,
    pub delta: f64,
    pub regret_n: f64,
    pub regret_map: f64,
    pub regret_u: Option<f64>,
    pub regret_t: Option<f64>,
    pub temperature: Option<f64>,
    pub noise_scale: Option<f64>,
    pub wd_hm: Option<f64>,
    pub wd_tt: Option<f64>,
    pub alpha_err: Option<f64>,
    pub alpha_err_matched: Option<f64>,
    pub theorem_bound: Option<f64>,
    pub theorem_bound3: Option<f64>,
    pub map_bound_n: Option<f64>,
    pub map_bound_nd: Option<f64>,
    pub corollary_temperature: Option<f64>,
    pub corollary_utility: Option<f64>,
    pub wd_status: WdStatus,
}

fn exceeds(regret: Option<f64>, bound: Option<f64>) -> Option<bool> {
    Some(regret? > bound?)
}

impl ResultRow {
    pub fn violates_bound(&self) -> Option<bool> {
        exceeds(Some(self.regret_n), self.theorem_bound)
    }

    pub fn violates_bound3(&self) -> Option<bool> {
        exceeds(Some(self.regret_n), self.theorem_bound3)
    }

    pub fn violates_map_n(&self) -> Option<bool> {
        exceeds(Some(self.regret_map), self.map_bound_n)
    }

    pub fn violates_map_nd(&self) -> Option<bool> {
        exceeds(Some(self.regret_map), self.map_bound_nd)
    }

    pub fn violates_temperature(&self) -> Option<bool> {
        exceeds(self.regret_t, self.corollary_temperature)
    }

    pub fn violates_utility(&self) -> Option<bool> {
        exceeds(self.regret_u, self.corollary_utility)
    }

    /// Row without a temperature or noise variant.
    pub fn is_base(&self) -> bool {
        self.temperature.is_none() && self.noise_scale.is_none()
    }
}

/// Aggregates over seeds for one grid point and variant.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub d_size: usize,
    pub delta: f64,
    pub temperature: Option<f64>,
    pub noise_scale: Option<f64>,
    pub rows: usize,
    pub mean_regret_n: f64,
    pub median_regret_n: f64,
    pub mean_regret_map: f64,
    pub median_regret_map: f64,
    pub mean_theorem_bound: Option<f64>,
    pub violation_rate_bound: Option<f64>,
    pub mean_theorem_bound3: Option<f64>,
    pub violation_rate_bound3: Option<f64>,
    pub mean_map_bound_n: Option<f64>,
    pub violation_rate_map_n: Option<f64>,
    pub mean_map_bound_nd: Option<f64>,
    pub violation_rate_map_nd: Option<f64>,
    pub mean_regret_t: Option<f64>,
    pub median_regret_t: Option<f64>,
    pub mean_corollary_temperature: Option<f64>,
    pub violation_rate_temperature: Option<f64>,
    pub mean_regret_u: Option<f64>,
    pub median_regret_u: Option<f64>,
    pub mean_corollary_utility: Option<f64>,
    pub violation_rate_utility: Option<f64>,
    /// Median over seeds of `theorem_bound − regret_n`.
    pub median_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: ExperimentSpec,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

fn rate(flags: impl Iterator<Item = Option<bool>>) -> Option<f64> {
    let (mut hits, mut total) = (0usize, 0usize);
    for f in flags.flatten() {
        total += 1;
        hits += f as usize;
    }
    (total > 0).then(|| hits as f64 / total as f64)
}

fn column(rows: &[&ResultRow], f: impl Fn(&ResultRow) -> Option<f64>) -> Vec<f64> {
    rows.iter().filter_map(|r| f(r)).collect()
}

fn group_key(r: &ResultRow) -> (usize, usize, u64, Option<u64>, Option<u64>) {
    (
        r.n,
        r.d_size,
        r.delta.to_bits(),
        r.temperature.map(f64::to_bits),
        r.noise_scale.map(f64::to_bits),
    )
}

/// Per-point statistics, in order of first appearance of each point.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut keys = Vec::new();
    let mut groups: std::collections::HashMap<_, Vec<&ResultRow>> = std::collections::HashMap::new();
    for r in rows {
        let k = group_key(r);
        groups
            .entry(k)
            .or_insert_with(|| {
                keys.push(k);
                Vec::new()
            })
            .push(r);
    }
    keys.iter()
        .map(|k| {
            let g = &groups[k];
            let first = g[0];
            let regret_n = column(g, |r| Some(r.regret_n));
            let regret_map = column(g, |r| Some(r.regret_map));
            let regret_t = column(g, |r| r.regret_t);
            let regret_u = column(g, |r| r.regret_u);
            let gaps = column(g, |r| r.theorem_bound.map(|b| b - r.regret_n));
            SummaryRow {
                n: first.n,
                d_size: first.d_size,
                delta: first.delta,
                temperature: first.temperature,
                noise_scale: first.noise_scale,
                rows: g.len(),
                mean_regret_n: mean(&regret_n).unwrap_or(0.0),
                median_regret_n: median(&regret_n).unwrap_or(0.0),
                mean_regret_map: mean(&regret_map).unwrap_or(0.0),
                median_regret_map: median(&regret_map).unwrap_or(0.0),
                mean_theorem_bound: mean(&column(g, |r| r.theorem_bound)),
                violation_rate_bound: rate(g.iter().map(|r| r.violates_bound())),
                mean_theorem_bound3: mean(&column(g, |r| r.theorem_bound3)),
                violation_rate_bound3: rate(g.iter().map(|r| r.violates_bound3())),
                mean_map_bound_n: mean(&column(g, |r| r.map_bound_n)),
                violation_rate_map_n: rate(g.iter().map(|r| r.violates_map_n())),
                mean_map_bound_nd: mean(&column(g, |r| r.map_bound_nd)),
                violation_rate_map_nd: rate(g.iter().map(|r| r.violates_map_nd())),
                mean_regret_t: mean(&regret_t),
                median_regret_t: median(&regret_t),
                mean_corollary_temperature: mean(&column(g, |r| r.corollary_temperature)),
                violation_rate_temperature: rate(g.iter().map(|r| r.violates_temperature())),
                mean_regret_u: mean(&regret_u),
                median_regret_u: median(&regret_u),
                mean_corollary_utility: mean(&column(g, |r| r.corollary_utility)),
                violation_rate_utility: rate(g.iter().map(|r| r.violates_utility())),
                median_gap: median(&gaps),
            }
        })
        .collect()
}

/// Everything a seed needs that does not depend on `n`.
pub(crate) struct SeedWorld {
    pub human: Categorical,
    pub utility: UtilityModel,
    pub human_scores: Vec<f64>,
    pub cost: std::result::Result<LipschitzCost, WdStatus>,
    /// Training draws of the largest `|D|`; smaller sizes use prefixes.
    pub train: crate::hypothesis_space::SampleSet,
    pub trial_seed: u64,
}

pub(crate) fn build_world(spec: &ExperimentSpec, index: usize) -> Result<SeedWorld> {
    let seed = trial_seed(spec.master_seed, index as u64);
    let human = make_human_distribution(spec.space_size, spec.human_family, spec.human_seed(index))?;
    let utility_seed = derive_seed(seed, stream::UTILITY);
    let utility = match spec.utility_kind {
        UtilityKind::Embedding => {
            UtilityModel::Embedding(build_embedding_utility(spec.space_size, spec.dim, spec.u_max, utility_seed)?)
        }
        UtilityKind::AppendixI => UtilityModel::Matrix(appendix_i_matrix(&human, spec.beta, utility_seed)?),
    };
    let human_scores = expected_utilities(&utility, &human)?;
    let cost = if spec.space_size > spec.wd_limit {
        Err(WdStatus::SkippedSize)
    } else {
        match default_cost(&utility, spec.cost_mode, spec.tightened_limit) {
            Ok(c) => Ok(c),
            Err(Error::CostTooLarge { .. }) => Err(WdStatus::SkippedCost),
            Err(e) => return Err(e),
        }
    };
    let max_d = *spec.d_grid.last().expect("validated nonempty");
    let train = sample(&human, max_d, derive_seed(seed, stream::TRAIN))?;
    Ok(SeedWorld {
        human,
        utility,
        human_scores,
        cost,
        train,
        trial_seed: seed,
    })
}

/// Sort key placing rows in (grid point, seed) order.
type RowKey = (usize, usize, usize, usize, usize);

fn bound_value(kind: BoundKind, inputs: &BoundInputs) -> Result<Option<f64>> {
    match kind.evaluate(inputs, Form::Published) {
        Ok(v) => Ok(Some(v.value)),
        Err(Error::MissingInput(_) | Error::InvalidParameter { name: "dim", .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn run_seed(spec: &ExperimentSpec, index: usize) -> Result<Vec<(RowKey, ResultRow)>> {
    let world = build_world(spec, index)?;
    let seed = world.trial_seed;
    let proxies = match world.utility.as_embedding() {
        Some(base) => spec
            .noise_scales
            .iter()
            .map(|&s| perturb_embeddings(base, s, derive_seed(seed, stream::NOISE)))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    let mut out = Vec::new();
    for (di, &d_size) in spec.d_grid.iter().enumerate() {
        let model = empirical_distribution(&world.train.prefix(d_size))?;
        let (wd_hm, wd_status) = match &world.cost {
            Ok(cost) => (Some(wasserstein(&world.human, &model, cost)?.distance), WdStatus::Computed),
            Err(status) => (None, *status),
        };
        let mut tempered_wd = Vec::with_capacity(spec.temperatures.len());
        for &t in &spec.temperatures {
            tempered_wd.push(match &world.cost {
                Ok(cost) => Some(wasserstein(&model, &temperature_transform(&model, t)?, cost)?.distance),
                Err(_) => None,
            });
        }
        for (ni, &n) in spec.n_grid.iter().enumerate() {
            let mut trial = TrialSpec::new(&world.human, &world.utility, ModelSource::Given(&model), n, seed);
            trial.candidates = spec.candidates;
            trial.human_scores = Some(&world.human_scores);
            let base = run_trial(&trial)?.report;
            let mut variants = vec![(None, None, None, None, None, None)];
            for (ti, &t) in spec.temperatures.iter().enumerate() {
                let mut tt = trial;
                tt.temperature = Some(t);
                let r = run_trial(&tt)?.report;
                variants.push((Some(t), None, r.regret_t, None, tempered_wd[ti], None));
            }
            for (pi, &s) in spec.noise_scales.iter().enumerate() {
                let mut tu = trial;
                tu.proxy = Some(proxies[pi].proxy());
                let r = run_trial(&tu)?.report;
                variants.push((None, Some(s), None, r.regret_u, None, Some(&proxies[pi])));
            }
            for (xi, &delta) in spec.deltas.iter().enumerate() {
                for (vi, (temperature, noise_scale, regret_t, regret_u, wd_tt, proxy)) in
                    variants.iter().enumerate()
                {
                    let mut inputs = BoundInputs::new(n, spec.dim, delta).with_d_size(d_size);
                    inputs.u_max = spec.u_max;
                    inputs.wd_hm = wd_hm;
                    inputs.wd_tt = *wd_tt;
                    inputs.alpha_err = proxy.map(|p| p.alpha_err());
                    let corollary_temperature = if temperature.is_some() {
                        bound_value(BoundKind::CorollaryTemperature, &inputs)?
                    } else {
                        None
                    };
                    let corollary_utility = if noise_scale.is_some() {
                        bound_value(BoundKind::CorollaryUtility, &inputs)?
                    } else {
                        None
                    };
                    let row = ResultRow {
                        seed,
                        n,
                        d_size,
                        delta,
                        regret_n: base.regret_n,
                        regret_map: base.regret_map,
                        regret_u: *regret_u,
                        regret_t: *regret_t,
                        temperature: *temperature,
                        noise_scale: *noise_scale,
                        wd_hm,
                        wd_tt: *wd_tt,
                        alpha_err: proxy.map(|p| p.alpha_err()),
                        alpha_err_matched: proxy.map(|p| p.alpha_err_matched()),
                        theorem_bound: bound_value(BoundKind::TheoremBound, &inputs)?,
                        theorem_bound3: bound_value(BoundKind::TheoremBound3, &inputs)?,
                        map_bound_n: bound_value(BoundKind::MapBoundN, &inputs)?,
                        map_bound_nd: bound_value(BoundKind::MapBoundNd, &inputs)?,
                        corollary_temperature,
                        corollary_utility,
                        wd_status,
                    };
                    out.push(((di, ni, xi, vi, index), row));
                }
            }
        }
    }
    Ok(out)
}

/// Run every seed of the experiment and summarize.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;
    let per_seed = (0..spec.seeds)
        .into_par_iter()
        .map(|i| run_seed(spec, i))
        .collect::<Result<Vec<_>>>()?;
    let mut keyed: Vec<(RowKey, ResultRow)> = per_seed.into_iter().flatten().collect();
    keyed.sort_by_key(|(k, _)| *k);
    let rows: Vec<ResultRow> = keyed.into_iter().map(|(_, r)| r).collect();
    let summary = summarize(&rows);
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
        summary,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|&v| v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = mean(&lx)?;
    let my = mean(&ly)?;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
