//! MBR and MAP decoders and the regret measurements comparing them.
//!
//! Every argmax in this module breaks ties toward the lowest hypothesis
//! index, so decoding is a pure function of its inputs.

use crate::error::{Error, Result};
use crate::hypothesis_space::{
    argmax_lowest, empirical_distribution, sample, temperature_transform, Categorical, SampleSet,
};
use crate::rng::{derive_seed, stream};
use crate::utility::Utility;

/// Which objective a [`DecodeResult`] maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Expected utility under the human distribution.
    HumanUtility,
    /// Expected utility under the model distribution.
    ModelUtility,
    /// Monte Carlo estimate over model samples.
    MonteCarloUtility,
    /// Monte Carlo estimate over temperature-transformed model samples.
    TemperedMonteCarloUtility,
    /// Monte Carlo estimate under a proxy utility.
    ProxyUtility,
    HumanProbability,
    ModelProbability,
    EmpiricalProbability,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeResult {
    pub chosen: usize,
    pub score: f64,
    pub objective: Objective,
}

impl DecodeResult {
    pub fn labelled(self, objective: Objective) -> Self {
        Self { objective, ..self }
    }
}

/// Candidate set for Monte Carlo MBR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CandidateSet {
    /// Distinct hypotheses present among the references.
    #[default]
    References,
    /// Every hypothesis in the space (ablation).
    FullSpace,
}

fn check_utility_space(utility: &dyn Utility, size: usize) -> Result<()> {
    if utility.size() == size {
        Ok(())
    } else {
        Err(Error::SpaceMismatch {
            left: utility.size(),
            right: size,
        })
    }
}

fn sparse(dist: &Categorical) -> Vec<(usize, f64)> {
    dist.probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| (i, p))
        .collect()
}

/// `Σ_{y'} u(target, y') · dist(y')`.
pub fn expected_utility(target: usize, utility: &dyn Utility, dist: &Categorical) -> Result<f64> {
    check_utility_space(utility, dist.len())?;
    dist.space().check_index(target)?;
    Ok(dist
        .probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(r, &p)| utility.value(target, r) * p)
        .sum())
}

/// Expected utility of every hypothesis under `dist`.
pub fn expected_utilities(utility: &dyn Utility, dist: &Categorical) -> Result<Vec<f64>> {
    check_utility_space(utility, dist.len())?;
    let targets: Vec<usize> = (0..dist.len()).collect();
    Ok(utility.weighted_scores(&targets, &sparse(dist)))
}

/// Arithmetic mean of `u(target, r)` over the references, with multiplicity.
pub fn mc_expected_utility(target: usize, utility: &dyn Utility, refs: &SampleSet) -> Result<f64> {
    if refs.is_empty() {
        return Err(Error::EmptySampleRequest);
    }
    check_utility_space(utility, refs.space().size())?;
    refs.space().check_index(target)?;
    let total: f64 = refs.indices().iter().map(|&r| utility.value(target, r)).sum();
    Ok(total / refs.len() as f64)
}

/// Argmax of expected utility over the full space.
pub fn mbr_decode_exact(utility: &dyn Utility, dist: &Categorical) -> Result<DecodeResult> {
    let scores = expected_utilities(utility, dist)?;
    let chosen = argmax_lowest(&scores);
    Ok(DecodeResult {
        chosen,
        score: scores[chosen],
        objective: Objective::HumanUtility,
    })
}

/// Monte Carlo MBR with candidates restricted to the distinct references.
pub fn mbr_decode_mc(utility: &dyn Utility, refs: &SampleSet) -> Result<DecodeResult> {
    mbr_decode_mc_with(utility, refs, CandidateSet::References)
}

pub fn mbr_decode_mc_with(
    utility: &dyn Utility,
    refs: &SampleSet,
    candidates: CandidateSet,
) -> Result<DecodeResult> {
    if refs.is_empty() {
        return Err(Error::EmptySampleRequest);
    }
    check_utility_space(utility, refs.space().size())?;
    let n = refs.len() as f64;
    let counts = refs.counts();
    let weights: Vec<(usize, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (i, c as f64 / n))
        .collect();
    let targets: Vec<usize> = match candidates {
        CandidateSet::References => weights.iter().map(|&(i, _)| i).collect(),
        CandidateSet::FullSpace => (0..counts.len()).collect(),
    };
    let scores = utility.weighted_scores(&targets, &weights);
    let best = argmax_lowest(&scores);
    Ok(DecodeResult {
        chosen: targets[best],
        score: scores[best],
        objective: Objective::MonteCarloUtility,
    })
}

/// Mode of a distribution.
pub fn map_decode(dist: &Categorical) -> DecodeResult {
    let chosen = dist.argmax();
    DecodeResult {
        chosen,
        score: dist.prob(chosen),
        objective: Objective::HumanProbability,
    }
}

/// Mode of the empirical frequencies of a sample.
pub fn map_decode_samples(refs: &SampleSet) -> Result<DecodeResult> {
    let empirical = empirical_distribution(refs)?;
    Ok(map_decode(&empirical).labelled(Objective::EmpiricalProbability))
}

/// Where the model distribution of a trial comes from.
#[derive(Debug, Clone, Copy)]
pub enum ModelSource<'a> {
    Given(&'a Categorical),
    /// Empirical distribution of `d_size` draws from the human distribution.
    Empirical { d_size: usize },
}

/// One regret measurement.
#[derive(Clone, Copy)]
pub struct TrialSpec<'a> {
    pub human: &'a Categorical,
    pub utility: &'a dyn Utility,
    pub model: ModelSource<'a>,
    pub n: usize,
    pub seed: u64,
    /// Also sample references from `P^t` of the model and measure `Regret^t`.
    pub temperature: Option<f64>,
    /// Also decode with a proxy utility and measure `Regret^u`.
    pub proxy: Option<&'a dyn Utility>,
    pub candidates: CandidateSet,
    /// Precomputed `u_h` for every hypothesis (must match `human`/`utility`).
    pub human_scores: Option<&'a [f64]>,
}

impl<'a> TrialSpec<'a> {
    pub fn new(human: &'a Categorical, utility: &'a dyn Utility, model: ModelSource<'a>, n: usize, seed: u64) -> Self {
        Self {
            human,
            utility,
            model,
            n,
            seed,
            temperature: None,
            proxy: None,
            candidates: CandidateSet::References,
            human_scores: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretReport {
    pub regret_n: f64,
    pub regret_map: f64,
    pub regret_u: Option<f64>,
    pub regret_t: Option<f64>,
    pub n: usize,
    pub d_size: Option<usize>,
    pub seed: u64,
}

/// Everything a trial computed, for callers that need more than the regrets.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub report: RegretReport,
    pub model: Categorical,
    pub refs: SampleSet,
    /// Exact MBR optimum under the human distribution.
    pub optimum: DecodeResult,
    /// Monte Carlo MBR choice.
    pub mbr: DecodeResult,
    pub map_optimum: DecodeResult,
    pub map: DecodeResult,
    pub proxy_choice: Option<DecodeResult>,
    pub tempered_choice: Option<DecodeResult>,
}

pub fn run_trial(spec: &TrialSpec<'_>) -> Result<TrialOutcome> {
    let human = spec.human;
    let size = human.len();
    check_utility_space(spec.utility, size)?;
    if spec.n == 0 {
        return Err(Error::EmptySampleRequest);
    }
    let (model, d_size) = match spec.model {
        ModelSource::Given(m) => {
            human.check_same_space(m)?;
            (m.clone(), None)
        }
        ModelSource::Empirical { d_size } => {
            let train = sample(human, d_size, derive_seed(spec.seed, stream::TRAIN))?;
            (empirical_distribution(&train)?, Some(d_size))
        }
    };

    let owned_scores;
    let human_scores = match spec.human_scores {
        Some(s) => {
            if s.len() != size {
                return Err(Error::SpaceMismatch {
                    left: s.len(),
                    right: size,
                });
            }
            s
        }
        None => {
            owned_scores = expected_utilities(spec.utility, human)?;
            &owned_scores
        }
    };
    let y_star = argmax_lowest(human_scores);
    let optimum = DecodeResult {
        chosen: y_star,
        score: human_scores[y_star],
        objective: Objective::HumanUtility,
    };

    let refs = sample(&model, spec.n, derive_seed(spec.seed, stream::REFS))?;
    let mbr = mbr_decode_mc_with(spec.utility, &refs, spec.candidates)?;
    let regret_n = human_scores[y_star] - human_scores[mbr.chosen];

    let map_optimum = map_decode(human);
    let map = map_decode_samples(&refs)?;
    let regret_map = human.prob(map_optimum.chosen) - human.prob(map.chosen);

    let proxy_choice = match spec.proxy {
        Some(proxy) => Some(mbr_decode_mc_with(proxy, &refs, spec.candidates)?.labelled(Objective::ProxyUtility)),
        None => None,
    };
    let regret_u = proxy_choice.map(|c| human_scores[y_star] - human_scores[c.chosen]);

    let tempered_choice = match spec.temperature {
        Some(t) => {
            let tempered = temperature_transform(&model, t)?;
            let refs_t = sample(&tempered, spec.n, derive_seed(spec.seed, stream::TEMPERED))?;
            Some(
                mbr_decode_mc_with(spec.utility, &refs_t, spec.candidates)?
                    .labelled(Objective::TemperedMonteCarloUtility),
            )
        }
        None => None,
    };
    let regret_t = tempered_choice.map(|c| human_scores[y_star] - human_scores[c.chosen]);

    Ok(TrialOutcome {
        report: RegretReport {
            regret_n,
            regret_map,
            regret_u,
            regret_t,
            n: spec.n,
            d_size,
            seed: spec.seed,
        },
        model,
        refs,
        optimum,
        mbr,
        map_optimum,
        map,
        proxy_choice,
        tempered_choice,
    })
}

/// Run the full pipeline of one trial and report its regrets.
pub fn measure_regret(spec: &TrialSpec<'_>) -> Result<RegretReport> {
    run_trial(spec).map(|o| o.report)
}
