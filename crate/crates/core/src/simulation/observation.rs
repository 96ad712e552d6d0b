//! Empirical sides of the MBR-versus-MAP target comparison.
//!
//! For each seed this measures how much human-expected utility the MAP
//! choice gives up (`u_h(y*) − u_h(ĥ)`), the model-side analogue
//! (`u_m(ŷ) − u_m(ĥ)`), and their difference. There is no pass/fail: the
//! asymptotic constant relating the two is unspecified.

use rayon::prelude::*;

use super::{build_world, ExperimentSpec};
use crate::decoding::{expected_utility, run_trial, ModelSource, TrialSpec};
use crate::error::Result;
use crate::hypothesis_space::empirical_distribution;

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationRow {
    pub seed: u64,
    pub n: usize,
    pub d_size: usize,
    /// `u_h(y*) − u_h(ĥ_MAP)`.
    pub human_side: f64,
    /// `u_m(ŷ^m) − u_m(ĥ_MAP)`.
    pub model_side: f64,
    /// `human_side − model_side`.
    pub gap: f64,
}

/// One row per (|D|, n, seed), in that order of nesting.
pub fn run_observation1_probe(spec: &ExperimentSpec) -> Result<Vec<ObservationRow>> {
    spec.validate()?;
    let per_seed = (0..spec.seeds)
        .into_par_iter()
        .map(|index| -> Result<Vec<((usize, usize, usize), ObservationRow)>> {
            let world = build_world(spec, index)?;
            let mut out = Vec::new();
            for (di, &d_size) in spec.d_grid.iter().enumerate() {
                let model = empirical_distribution(&world.train.prefix(d_size))?;
                for (ni, &n) in spec.n_grid.iter().enumerate() {
                    let mut trial =
                        TrialSpec::new(&world.human, &world.utility, ModelSource::Given(&model), n, world.trial_seed);
                    trial.human_scores = Some(&world.human_scores);
                    trial.candidates = spec.candidates;
                    let o = run_trial(&trial)?;
                    let map = o.map.chosen;
                    let human_side = world.human_scores[o.optimum.chosen] - world.human_scores[map];
                    let model_side = expected_utility(o.mbr.chosen, &world.utility, &model)?
                        - expected_utility(map, &world.utility, &model)?;
                    out.push((
                        (di, ni, index),
                        ObservationRow {
                            seed: world.trial_seed,
                            n,
                            d_size,
                            human_side,
                            model_side,
                            gap: human_side - model_side,
                        },
                    ));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut keyed: Vec<_> = per_seed.into_iter().flatten().collect();
    keyed.sort_by_key(|(k, _)| *k);
    Ok(keyed.into_iter().map(|(_, r)| r).collect())
}
