//! Flat `section.key = value` configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment
//! section.key = value        # trailing comment
//! experiment.n_grid = 25, 50, 100
//! ```
//!
//! Keys must be registered in [`KNOWN_KEYS`]. Lists are comma separated.
//! Relative paths are resolved against the directory of the config file.
//! Command-line overrides replace file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bounds::{BoundInputs, Form};
use crate::decoding::CandidateSet;
use crate::error::{Error, Result};
use crate::hypothesis_space::HumanFamily;
use crate::simulation::{ExperimentSpec, UtilityKind};
use crate::utility::CostMode;

/// Every accepted key with a one-line description.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("experiment.space_size", "number of hypotheses"),
    ("experiment.dim", "embedding dimension"),
    ("experiment.u_max", "utility upper bound"),
    ("experiment.human_family", "zipf or dirichlet"),
    ("experiment.human_param", "zipf exponent or dirichlet concentration"),
    ("experiment.fixed_human", "share one human distribution across seeds"),
    ("experiment.utility", "embedding or appendix_i"),
    ("experiment.beta", "diagonal boost for appendix_i"),
    ("experiment.n_grid", "reference counts"),
    ("experiment.d_grid", "training set sizes"),
    ("experiment.deltas", "failure probabilities"),
    ("experiment.temperatures", "temperature variants"),
    ("experiment.noise_scales", "proxy utility noise levels"),
    ("experiment.seeds", "number of seeds"),
    ("experiment.master_seed", "master seed"),
    ("experiment.cost_mode", "trivial or tightened"),
    ("experiment.wd_limit", "largest space for Wasserstein terms"),
    ("experiment.tightened_limit", "largest space for the tightened cost"),
    ("experiment.candidates", "references or full_space"),
    ("experiment.observation1", "also write the MBR/MAP target probe"),
    ("decode.distribution", "model distribution file"),
    ("decode.human", "human distribution file"),
    ("decode.utility", "utility matrix file"),
    ("decode.u_max", "utility upper bound"),
    ("decode.n", "number of references"),
    ("decode.seed", "reference sampling seed"),
    ("bounds.n", "number of references"),
    ("bounds.D", "training set size"),
    ("bounds.dim", "embedding dimension"),
    ("bounds.delta", "failure probability"),
    ("bounds.wd_hm", "Wasserstein distance between human and model"),
    ("bounds.wd_tt", "Wasserstein distance between model and tempered model"),
    ("bounds.u_max", "utility upper bound"),
    ("bounds.alpha_err", "embedding error of a proxy utility"),
    ("bounds.form", "published or raw"),
    ("wd.nu", "first distribution file"),
    ("wd.mu", "second distribution file"),
    ("wd.cost", "cost matrix file"),
    ("wd.utility", "utility matrix file to derive the cost from"),
    ("wd.cost_mode", "trivial or tightened"),
    ("wd.u_max", "utility upper bound"),
    ("wd.dump_coupling", "write the optimal coupling"),
    ("crossover.n_grid", "reference counts"),
    ("crossover.d_grid", "training set sizes"),
    ("crossover.dim", "embedding dimension"),
    ("crossover.delta", "failure probability"),
    ("crossover.n_max", "scan limit for the |D| -> infinity threshold"),
    ("report.results", "results CSV to summarize"),
];

pub fn is_known_key(key: &str) -> bool {
    KNOWN_KEYS.iter().any(|(k, _)| *k == key)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
    base_dir: Option<PathBuf>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::File {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text, path)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Parse config text; `origin` is only used in error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `section.key = value`, got `{line}`")))?;
            let key = key.trim();
            if !is_known_key(key) {
                return Err(err(format!("unknown key `{key}`")));
            }
            if values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { values, base_dir: None })
    }

    /// Apply one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        self.insert(key.trim(), value.trim())
    }

    pub fn insert(&mut self, key: &str, value: &str) -> Result<()> {
        if !is_known_key(key) {
            return Err(Error::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(v) = self.get(key) else {
            return Ok(None);
        };
        if v.is_empty() {
            return Ok(Some(Vec::new()));
        }
        v.split(',')
            .map(|item| {
                let item = item.trim();
                item.parse()
                    .map_err(|_| Error::Config(format!("{key}: cannot parse list item `{item}`")))
            })
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    pub fn flag(&self, key: &str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some("true" | "yes" | "1") => Ok(Some(true)),
            Some("false" | "no" | "0") => Ok(Some(false)),
            Some(v) => Err(Error::Config(format!("{key}: expected true or false, got `{v}`"))),
        }
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(|v| {
            let p = PathBuf::from(v);
            match &self.base_dir {
                Some(base) if p.is_relative() => base.join(p),
                _ => p,
            }
        })
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf> {
        self.path(key)
            .ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    pub fn experiment_spec(&self) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::default();
        macro_rules! scalar {
            ($key:literal, $field:ident) => {
                if let Some(v) = self.parsed(concat!("experiment.", $key))? {
                    spec.$field = v;
                }
            };
        }
        macro_rules! grid {
            ($key:literal, $field:ident) => {
                if let Some(v) = self.list(concat!("experiment.", $key))? {
                    spec.$field = v;
                }
            };
        }
        scalar!("space_size", space_size);
        scalar!("dim", dim);
        scalar!("u_max", u_max);
        scalar!("beta", beta);
        scalar!("seeds", seeds);
        scalar!("master_seed", master_seed);
        scalar!("wd_limit", wd_limit);
        scalar!("tightened_limit", tightened_limit);
        grid!("n_grid", n_grid);
        grid!("d_grid", d_grid);
        grid!("deltas", deltas);
        grid!("temperatures", temperatures);
        grid!("noise_scales", noise_scales);
        if let Some(v) = self.flag("experiment.fixed_human")? {
            spec.fixed_human = v;
        }
        let family = self.get("experiment.human_family");
        let param: Option<f64> = self.parsed("experiment.human_param")?;
        if family.is_some() || param.is_some() {
            let name = family.unwrap_or(spec.human_family.name());
            let param = param.unwrap_or(1.0);
            spec.human_family = HumanFamily::from_name(name, param)?;
        }
        if let Some(v) = self.get("experiment.utility") {
            spec.utility_kind = UtilityKind::from_name(v)?;
        }
        if let Some(v) = self.get("experiment.cost_mode") {
            spec.cost_mode = CostMode::from_name(v)?;
        }
        if let Some(v) = self.get("experiment.candidates") {
            spec.candidates = parse_candidates(v)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn bound_inputs(&self) -> Result<(BoundInputs, Form)> {
        let n = self.require("bounds.n")?;
        let delta = self.require("bounds.delta")?;
        let dim = self.parsed("bounds.dim")?.unwrap_or(4);
        let mut inputs = BoundInputs::new(n, dim, delta);
        if let Some(d) = self.parsed("bounds.D")? {
            inputs = inputs.with_d_size(d);
        }
        if let Some(w) = self.parsed("bounds.wd_hm")? {
            inputs = inputs.with_wd_hm(w);
        }
        if let Some(w) = self.parsed("bounds.wd_tt")? {
            inputs = inputs.with_wd_tt(w);
        }
        if let Some(a) = self.parsed("bounds.alpha_err")? {
            inputs = inputs.with_alpha_err(a);
        }
        if let Some(u) = self.parsed("bounds.u_max")? {
            inputs.u_max = u;
        }
        let form = match self.get("bounds.form").unwrap_or("published") {
            "published" => Form::Published,
            "raw" => Form::Raw,
            other => return Err(Error::Config(format!("bounds.form: unknown form `{other}`"))),
        };
        Ok((inputs, form))
    }
}

pub fn parse_candidates(name: &str) -> Result<CandidateSet> {
    match name {
        "references" | "refs" => Ok(CandidateSet::References),
        "full_space" | "full" => Ok(CandidateSet::FullSpace),
        other => Err(Error::Config(format!(
            "unknown candidate set `{other}` (expected references or full_space)"
        ))),
    }
}
