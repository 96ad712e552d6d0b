//! Closed-form regret upper bounds and the MBR/MAP crossover predicates.
//!
//! Logarithms are natural. Every bound exists in its published, simplified
//! form; [`Form::Raw`] selects the form before constants were rounded up,
//! which carries `u_max` explicitly.

use std::fmt;

use crate::error::{Error, Result};

/// Everything any bound might need. Optional fields are only required by the
/// bounds that mention them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub n: usize,
    pub d_size: Option<usize>,
    pub dim: usize,
    pub delta: f64,
    pub wd_hm: Option<f64>,
    pub wd_tt: Option<f64>,
    pub u_max: f64,
    pub alpha_err: Option<f64>,
}

impl BoundInputs {
    pub fn new(n: usize, dim: usize, delta: f64) -> Self {
        Self {
            n,
            d_size: None,
            dim,
            delta,
            wd_hm: None,
            wd_tt: None,
            u_max: 1.0,
            alpha_err: None,
        }
    }

    pub fn with_d_size(mut self, d_size: usize) -> Self {
        self.d_size = Some(d_size);
        self
    }

    pub fn with_wd_hm(mut self, wd: f64) -> Self {
        self.wd_hm = Some(wd);
        self
    }

    pub fn with_wd_tt(mut self, wd: f64) -> Self {
        self.wd_tt = Some(wd);
        self
    }

    pub fn with_alpha_err(mut self, alpha_err: f64) -> Self {
        self.alpha_err = Some(alpha_err);
        self
    }

    fn d_size(&self) -> Result<usize> {
        self.d_size.ok_or(Error::MissingInput("D"))
    }

    fn wd_hm(&self) -> Result<f64> {
        self.wd_hm.ok_or(Error::MissingInput("WD(P_human,P_model)"))
    }

    fn wd_tt(&self) -> Result<f64> {
        self.wd_tt.ok_or(Error::MissingInput("WD(P_model,P_model^t)"))
    }

    fn alpha_err(&self) -> Result<f64> {
        self.alpha_err.ok_or(Error::MissingInput("alpha_err"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Form {
    #[default]
    Published,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    LemmaHeart,
    LemmaHeartSmallD,
    LemmaKernel,
    LemmaWd,
    LemmaBlack,
    TheoremBound3,
    TheoremBound,
    /// Expected-regret form of [`BoundKind::TheoremBound3`] (bound + δ).
    ExpectedBound3,
    /// Expected-regret form of [`BoundKind::TheoremBound`] (bound + δ).
    ExpectedBound,
    CorollaryUtility,
    CorollaryTemperature,
    MapBoundN,
    MapBoundNd,
}

impl BoundKind {
    pub const ALL: [BoundKind; 13] = [
        BoundKind::LemmaHeart,
        BoundKind::LemmaHeartSmallD,
        BoundKind::LemmaKernel,
        BoundKind::LemmaWd,
        BoundKind::LemmaBlack,
        BoundKind::TheoremBound3,
        BoundKind::TheoremBound,
        BoundKind::ExpectedBound3,
        BoundKind::ExpectedBound,
        BoundKind::CorollaryUtility,
        BoundKind::CorollaryTemperature,
        BoundKind::MapBoundN,
        BoundKind::MapBoundNd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::LemmaHeart => "lemma_heart",
            BoundKind::LemmaHeartSmallD => "lemma_heart_smalld",
            BoundKind::LemmaKernel => "lemma_kernel",
            BoundKind::LemmaWd => "lemma_wd",
            BoundKind::LemmaBlack => "lemma_black",
            BoundKind::TheoremBound3 => "theorem_bound3",
            BoundKind::TheoremBound => "theorem_bound",
            BoundKind::ExpectedBound3 => "expected_bound3",
            BoundKind::ExpectedBound => "expected_bound",
            BoundKind::CorollaryUtility => "corollary_utility",
            BoundKind::CorollaryTemperature => "corollary_temperature",
            BoundKind::MapBoundN => "map_bound_n",
            BoundKind::MapBoundNd => "map_bound_nd",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::param("bound", format!("unknown bound `{name}`")))
    }

    pub fn evaluate(self, inputs: &BoundInputs, form: Form) -> Result<BoundValue> {
        validate(inputs)?;
        let terms = match form {
            Form::Published => published_terms(self, inputs)?,
            Form::Raw => raw_terms(self, inputs)?,
        };
        Ok(BoundValue::from_terms(self, terms))
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One additive contribution to a bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub label: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub value: f64,
    pub terms: Vec<Term>,
}

impl BoundValue {
    fn from_terms(kind: BoundKind, terms: Vec<Term>) -> Self {
        let value = terms.iter().map(|t| t.value).sum();
        Self { kind, value, terms }
    }

    /// Label of the largest term.
    pub fn dominant_term(&self) -> &'static str {
        self.terms
            .iter()
            .fold(None::<&Term>, |best, t| match best {
                Some(b) if b.value >= t.value => Some(b),
                _ => Some(t),
            })
            .map(|t| t.label)
            .unwrap_or("")
    }
}

/// Every bound evaluable from one set of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub values: Vec<BoundValue>,
    /// Bounds that could not be evaluated, with the reason.
    pub skipped: Vec<(BoundKind, String)>,
}

impl BoundReport {
    /// Evaluate every bound. Domain errors on `delta` or counts abort; a
    /// missing optional input or an inapplicable dimension only skips.
    pub fn evaluate(inputs: &BoundInputs, form: Form) -> Result<Self> {
        validate(inputs)?;
        let mut values = Vec::new();
        let mut skipped = Vec::new();
        for kind in BoundKind::ALL {
            match kind.evaluate(inputs, form) {
                Ok(v) => values.push(v),
                Err(e @ (Error::MissingInput(_) | Error::InvalidParameter { name: "dim", .. })) => {
                    skipped.push((kind, e.to_string()))
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Self { values, skipped })
    }

    pub fn get(&self, kind: BoundKind) -> Option<&BoundValue> {
        self.values.iter().find(|v| v.kind == kind)
    }
}

fn validate(inputs: &BoundInputs) -> Result<()> {
    check_delta(inputs.delta)?;
    check_count("n", inputs.n)?;
    check_count("dim", inputs.dim)?;
    if let Some(d) = inputs.d_size {
        check_count("D", d)?;
    }
    if !(inputs.u_max > 0.0 && inputs.u_max.is_finite()) {
        return Err(Error::param("u_max", format!("must be positive, got {}", inputs.u_max)));
    }
    for (name, v) in [
        ("wd_hm", inputs.wd_hm),
        ("wd_tt", inputs.wd_tt),
        ("alpha_err", inputs.alpha_err),
    ] {
        if let Some(v) = v {
            check_nonnegative(name, v)?;
        }
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}

fn check_count(name: &'static str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(Error::param(name, "must be at least 1"))
    }
}

fn check_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be finite and >= 0, got {v}")))
    }
}

fn require_large_dim(dim: usize) -> Result<()> {
    if dim >= 4 {
        Ok(())
    } else {
        Err(Error::param("dim", format!("requires d >= 4, got {dim}; use lemma_heart_smalld")))
    }
}

/// `coef · √(ln(1/δ) / count)`.
fn concentration(coef: f64, count: usize, delta: f64) -> f64 {
    coef * ((1.0 / delta).ln() / count as f64).sqrt()
}

/// `(36/n) √(d ln d)`.
fn dimension_term(n: usize, dim: usize) -> f64 {
    let d = dim as f64;
    36.0 / n as f64 * (d * d.ln()).sqrt()
}

/// `coef · U · √(ln(k/δ) / (2·count))`, the unsimplified Hoeffding/DKW term.
fn hoeffding(coef: f64, u_max: f64, k: f64, count: usize, delta: f64) -> f64 {
    coef * u_max * ((k / delta).ln() / (2.0 * count as f64)).sqrt()
}

/// `(12U/n)(√(d ln(2√d)) + 2√d)`, the Rademacher complexity term.
fn rademacher_term(u_max: f64, n: usize, dim: usize) -> f64 {
    let d = dim as f64;
    12.0 * u_max / n as f64 * ((d * (2.0 * d.sqrt()).ln()).sqrt() + 2.0 * d.sqrt())
}

fn term(label: &'static str, value: f64) -> Term {
    Term { label, value }
}

fn published_terms(kind: BoundKind, x: &BoundInputs) -> Result<Vec<Term>> {
    let (n, dim, delta) = (x.n, x.dim, x.delta);
    Ok(match kind {
        BoundKind::LemmaHeart => {
            require_large_dim(dim)?;
            vec![
                term("sampling", concentration(3.0, n, delta)),
                term("dimension", dimension_term(n, dim)),
            ]
        }
        BoundKind::LemmaHeartSmallD => {
            if dim >= 4 {
                return Err(Error::param("dim", format!("requires d < 4, got {dim}; use lemma_heart")));
            }
            vec![
                term("sampling", concentration(3.0, n, delta)),
                term("dimension", 72.0 * (dim as f64).sqrt() / n as f64),
            ]
        }
        BoundKind::LemmaKernel => vec![
            term("sampling", concentration(3.0, n, delta)),
            term("kernel_complexity", 2.0 / (n as f64).sqrt()),
        ],
        BoundKind::LemmaWd => vec![term("transport", 2.0 * x.wd_hm()?)],
        BoundKind::LemmaBlack => vec![term("training", concentration(3.0, x.d_size()?, delta))],
        BoundKind::TheoremBound3 => {
            let mut t = published_terms(BoundKind::LemmaHeart, x)?;
            t.extend(published_terms(BoundKind::LemmaWd, x)?);
            t
        }
        BoundKind::TheoremBound => {
            require_large_dim(dim)?;
            vec![
                term("sampling", concentration(4.0, n, delta)),
                term("training", concentration(4.0, x.d_size()?, delta)),
                term("dimension", dimension_term(n, dim)),
            ]
        }
        BoundKind::ExpectedBound3 => {
            let mut t = published_terms(BoundKind::TheoremBound3, x)?;
            t.push(term("failure_mass", delta));
            t
        }
        BoundKind::ExpectedBound => {
            let mut t = published_terms(BoundKind::TheoremBound, x)?;
            t.push(term("failure_mass", delta));
            t
        }
        BoundKind::CorollaryUtility => vec![
            term("training", concentration(4.0, x.d_size()?, delta)),
            term("sampling", concentration(4.0, n, delta)),
            term("utility_error", 2.0 * dim as f64 * x.alpha_err()?),
        ],
        BoundKind::CorollaryTemperature => {
            let mut t = published_terms(BoundKind::TheoremBound, x)?;
            t.push(term("temperature_transport", x.wd_tt()?));
            t
        }
        BoundKind::MapBoundN => vec![
            term("sampling", concentration(6.0, n, delta)),
            term("transport", 2.0 * x.wd_hm()?),
        ],
        BoundKind::MapBoundNd => vec![
            term("sampling", concentration(8.0, n, delta)),
            term("training", concentration(8.0, x.d_size()?, delta)),
        ],
    })
}

fn raw_terms(kind: BoundKind, x: &BoundInputs) -> Result<Vec<Term>> {
    let (n, dim, delta, u) = (x.n, x.dim, x.delta, x.u_max);
    Ok(match kind {
        BoundKind::LemmaHeart | BoundKind::LemmaHeartSmallD => {
            // Applicability follows the published split on d.
            published_terms(kind, x)?;
            vec![
                term("sampling", hoeffding(2.0, u, 4.0, n, delta)),
                term("dimension", rademacher_term(u, n, dim)),
            ]
        }
        BoundKind::LemmaKernel => vec![
            term("sampling", hoeffding(2.0, u, 4.0, n, delta)),
            term("kernel_complexity", 2.0 * u / (n as f64).sqrt()),
        ],
        BoundKind::LemmaWd => vec![term("transport", 2.0 * x.wd_hm()?)],
        BoundKind::LemmaBlack => vec![term("training", hoeffding(2.0, u, 4.0, x.d_size()?, delta))],
        BoundKind::TheoremBound3 => {
            let mut t = raw_terms(BoundKind::LemmaHeart, x)?;
            t.extend(raw_terms(BoundKind::LemmaWd, x)?);
            t
        }
        BoundKind::TheoremBound => {
            require_large_dim(dim)?;
            vec![
                term("sampling", hoeffding(2.0, u, 8.0, n, delta)),
                term("training", hoeffding(2.0, u, 8.0, x.d_size()?, delta)),
                term("dimension", rademacher_term(u, n, dim)),
            ]
        }
        BoundKind::ExpectedBound3 | BoundKind::ExpectedBound => {
            let base = if kind == BoundKind::ExpectedBound3 {
                BoundKind::TheoremBound3
            } else {
                BoundKind::TheoremBound
            };
            let r: f64 = raw_terms(base, x)?.iter().map(|t| t.value).sum();
            vec![
                term("confident_part", (1.0 - delta) * r),
                term("failure_mass", delta * u),
            ]
        }
        BoundKind::CorollaryUtility => vec![
            term("training", concentration(4.0, x.d_size()?, delta)),
            term("sampling", concentration(4.0, n, delta)),
            term("utility_error", 2.0 * x.alpha_err()?),
        ],
        BoundKind::CorollaryTemperature => {
            let mut t = raw_terms(BoundKind::TheoremBound, x)?;
            t.push(term("temperature_transport", 2.0 * x.wd_tt()?));
            t
        }
        BoundKind::MapBoundN => vec![
            term("sampling", hoeffding(4.0, 1.0, 8.0, n, delta)),
            term("transport", 2.0 * x.wd_hm()?),
        ],
        BoundKind::MapBoundNd => vec![
            term("sampling", hoeffding(4.0, 1.0, 8.0, n, delta)),
            term("training", hoeffding(4.0, 1.0, 8.0, x.d_size()?, delta)),
        ],
    })
}

fn published(kind: BoundKind, inputs: BoundInputs) -> Result<f64> {
    kind.evaluate(&inputs, Form::Published).map(|v| v.value)
}

pub fn lemma_heart(n: usize, dim: usize, delta: f64) -> Result<f64> {
    published(BoundKind::LemmaHeart, BoundInputs::new(n, dim, delta))
}

pub fn lemma_heart_smalld(n: usize, dim: usize, delta: f64) -> Result<f64> {
    published(BoundKind::LemmaHeartSmallD, BoundInputs::new(n, dim, delta))
}

pub fn lemma_kernel(n: usize, delta: f64) -> Result<f64> {
    published(BoundKind::LemmaKernel, BoundInputs::new(n, 1, delta))
}

pub fn lemma_wd(wd_hm: f64) -> Result<f64> {
    check_nonnegative("wd_hm", wd_hm)?;
    Ok(2.0 * wd_hm)
}

pub fn lemma_black(d_size: usize, delta: f64) -> Result<f64> {
    published(BoundKind::LemmaBlack, BoundInputs::new(1, 1, delta).with_d_size(d_size))
}

pub fn theorem_bound3(n: usize, dim: usize, delta: f64, wd_hm: f64) -> Result<f64> {
    published(BoundKind::TheoremBound3, BoundInputs::new(n, dim, delta).with_wd_hm(wd_hm))
}

pub fn theorem_bound(n: usize, d_size: usize, dim: usize, delta: f64) -> Result<f64> {
    published(BoundKind::TheoremBound, BoundInputs::new(n, dim, delta).with_d_size(d_size))
}

/// `(1 − δ)·R + δ·U` for a bound `R` holding with probability `1 − δ` and a
/// worst-case regret `U`.
pub fn expected_regret(bound_value: f64, delta: f64, worst_case: f64) -> Result<f64> {
    check_delta(delta)?;
    check_nonnegative("bound_value", bound_value)?;
    check_nonnegative("worst_case", worst_case)?;
    Ok((1.0 - delta) * bound_value + delta * worst_case)
}

pub fn corollary_utility(n: usize, d_size: usize, dim: usize, delta: f64, alpha_err: f64) -> Result<f64> {
    published(
        BoundKind::CorollaryUtility,
        BoundInputs::new(n, dim, delta).with_d_size(d_size).with_alpha_err(alpha_err),
    )
}

pub fn corollary_temperature(n: usize, d_size: usize, dim: usize, delta: f64, wd_tt: f64) -> Result<f64> {
    published(
        BoundKind::CorollaryTemperature,
        BoundInputs::new(n, dim, delta).with_d_size(d_size).with_wd_tt(wd_tt),
    )
}

pub fn map_bound_n(n: usize, delta: f64, wd_hm: f64) -> Result<f64> {
    published(BoundKind::MapBoundN, BoundInputs::new(n, 1, delta).with_wd_hm(wd_hm))
}

pub fn map_bound_nd(n: usize, d_size: usize, delta: f64) -> Result<f64> {
    published(BoundKind::MapBoundNd, BoundInputs::new(n, 1, delta).with_d_size(d_size))
}

fn crossover_rhs(dim: usize) -> f64 {
    let d = dim as f64;
    (d * d.ln()).sqrt()
}

/// MBR bound beats the MAP bound as `|D| → ∞`.
pub fn crossover_case2(n: usize, dim: usize, delta: f64) -> Result<bool> {
    validate(&BoundInputs::new(n, dim, delta))?;
    let lhs = (n as f64 * (1.0 / delta).ln()).sqrt() / 9.0;
    Ok(lhs >= crossover_rhs(dim))
}

/// MBR bound beats the MAP bound at finite `n` and `|D|`.
pub fn crossover_case3(n: usize, d_size: usize, dim: usize, delta: f64) -> Result<bool> {
    validate(&BoundInputs::new(n, dim, delta).with_d_size(d_size))?;
    let l = (1.0 / delta).ln();
    let lhs = n as f64 / 9.0 * ((l / n as f64).sqrt() + (l / d_size as f64).sqrt());
    Ok(lhs >= crossover_rhs(dim))
}

/// `map_bound_nd − theorem_bound`; nonnegative exactly in the case-3 regime.
pub fn bound_gap(n: usize, d_size: usize, dim: usize, delta: f64) -> Result<f64> {
    Ok(map_bound_nd(n, d_size, delta)? - theorem_bound(n, d_size, dim, delta)?)
}

/// Smallest `n` satisfying [`crossover_case2`], from `n ≥ 81·d·ln d / ln(1/δ)`.
pub fn case2_threshold(dim: usize, delta: f64) -> Result<usize> {
    validate(&BoundInputs::new(1, dim, delta))?;
    let d = dim as f64;
    let analytic = 81.0 * d * d.ln() / (1.0 / delta).ln();
    let mut n = (analytic.ceil() as usize).max(1);
    // Floating-point rounding can put the predicate one step off the ceiling.
    while n > 1 && crossover_case2(n - 1, dim, delta)? {
        n -= 1;
    }
    while !crossover_case2(n, dim, delta)? {
        n += 1;
    }
    Ok(n)
}
