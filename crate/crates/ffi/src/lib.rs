//! C ABI over `mbrlab`.
//!
//! Objects cross the boundary as opaque handles created by `mbr_*_new`
//! functions and released with the matching `mbr_*_free`. Every fallible
//! function returns an [`MbrStatus`]; on failure a description is available
//! from [`mbr_last_error_message`] on the same thread until the next call.
//! Panics are caught and reported as [`MbrStatus::Panic`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use mbrlab::bounds::{BoundInputs, BoundKind, Form};
use mbrlab::decoding::{self, expected_utility, map_decode};
use mbrlab::hypothesis_space::{
    empirical_distribution, make_human_distribution, sample, temperature_transform, Categorical, HumanFamily,
    HypothesisSpace, SampleSet,
};
use mbrlab::transport::wasserstein;
use mbrlab::utility::{EmbeddingUtility, LipschitzCost, MatrixUtility, Utility, UtilityModel};
use mbrlab::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MbrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDistribution = 3,
    SpaceMismatch = 4,
    IndexOutOfRange = 5,
    InvalidDelta = 6,
    MissingInput = 7,
    TooLarge = 8,
    SolverFailure = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MbrHumanFamily {
    Zipf = 0,
    Dirichlet = 1,
}

/// Inputs to [`mbr_bound_eval`]. `d_size == 0` and NaN floats mean "absent".
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MbrBoundInputs {
    pub n: usize,
    pub d_size: usize,
    pub dim: usize,
    pub delta: f64,
    pub wd_hm: f64,
    pub wd_tt: f64,
    pub u_max: f64,
    pub alpha_err: f64,
}

/// Opaque categorical distribution.
pub struct MbrCategorical(Categorical);

/// Opaque utility function.
pub struct MbrUtility(UtilityModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> MbrStatus {
    match e {
        Error::InvalidDistribution(_) | Error::InvalidSpace(_) | Error::EmptySampleRequest => {
            MbrStatus::InvalidDistribution
        }
        Error::SpaceMismatch { .. } => MbrStatus::SpaceMismatch,
        Error::IndexOutOfRange { .. } => MbrStatus::IndexOutOfRange,
        Error::InvalidDelta(_) => MbrStatus::InvalidDelta,
        Error::MissingInput(_) => MbrStatus::MissingInput,
        Error::CostTooLarge { .. } | Error::SupportTooLarge { .. } => MbrStatus::TooLarge,
        Error::Solver(_) => MbrStatus::SolverFailure,
        _ => MbrStatus::InvalidArgument,
    }
}

struct Fail(MbrStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(MbrStatus::NullPointer, format!("{what} is null"))
}

/// Run `body`, translating errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Fail>) -> MbrStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => MbrStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            MbrStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Fail> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(ptr: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if ptr.is_null() {
        return Err(null(what));
    }
    ptr.write(value);
    Ok(())
}

fn optional(v: f64) -> Option<f64> {
    (!v.is_nan()).then_some(v)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mbr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn mbr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Distribution over `len` hypotheses; `probs` must be nonnegative and sum to 1.
#[no_mangle]
pub unsafe extern "C" fn mbr_categorical_new(
    probs: *const f64,
    len: usize,
    out: *mut *mut MbrCategorical,
) -> MbrStatus {
    guard(|| {
        let probs = slice(probs, len, "probs")?.to_vec();
        let dist = Categorical::from_probs(probs)?;
        write_out(out, Box::into_raw(Box::new(MbrCategorical(dist))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn mbr_categorical_free(dist: *mut MbrCategorical) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Number of hypotheses, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn mbr_categorical_len(dist: *const MbrCategorical) -> usize {
    dist.as_ref().map_or(0, |d| d.0.len())
}

/// Copy the probabilities into `out[0..len]`; `len` must equal the size.
#[no_mangle]
pub unsafe extern "C" fn mbr_categorical_probs(dist: *const MbrCategorical, out: *mut f64, len: usize) -> MbrStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        if len != d.0.len() {
            return Err(Fail(
                MbrStatus::InvalidArgument,
                format!("buffer holds {len} values, distribution has {}", d.0.len()),
            ));
        }
        slice_mut(out, len, "out")?.copy_from_slice(d.0.probs());
        Ok(())
    })
}

/// Draw `count` indices with the given seed into `out[0..count]`.
#[no_mangle]
pub unsafe extern "C" fn mbr_categorical_sample(
    dist: *const MbrCategorical,
    count: usize,
    seed: u64,
    out: *mut usize,
) -> MbrStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let draws = sample(&d.0, count, seed)?;
        slice_mut(out, count, "out")?.copy_from_slice(draws.indices());
        Ok(())
    })
}

/// Empirical distribution of `count` indices over a space of `space_size`.
#[no_mangle]
pub unsafe extern "C" fn mbr_empirical_new(
    space_size: usize,
    indices: *const usize,
    count: usize,
    out: *mut *mut MbrCategorical,
) -> MbrStatus {
    guard(|| {
        let space = Arc::new(HypothesisSpace::new(space_size)?);
        let samples = SampleSet::new(space, slice(indices, count, "indices")?.to_vec(), 0)?;
        let dist = empirical_distribution(&samples)?;
        write_out(out, Box::into_raw(Box::new(MbrCategorical(dist))), "out")
    })
}

/// Temperature-transformed copy of `dist`.
#[no_mangle]
pub unsafe extern "C" fn mbr_temperature_new(
    dist: *const MbrCategorical,
    temperature: f64,
    out: *mut *mut MbrCategorical,
) -> MbrStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let tempered = temperature_transform(&d.0, temperature)?;
        write_out(out, Box::into_raw(Box::new(MbrCategorical(tempered))), "out")
    })
}

/// Synthetic human distribution.
#[no_mangle]
pub unsafe extern "C" fn mbr_human_new(
    size: usize,
    family: MbrHumanFamily,
    param: f64,
    seed: u64,
    out: *mut *mut MbrCategorical,
) -> MbrStatus {
    guard(|| {
        let family = match family {
            MbrHumanFamily::Zipf => HumanFamily::Zipf { s: param },
            MbrHumanFamily::Dirichlet => HumanFamily::Dirichlet { alpha: param },
        };
        let dist = make_human_distribution(size, family, seed)?;
        write_out(out, Box::into_raw(Box::new(MbrCategorical(dist))), "out")
    })
}

/// Utility from a row-major `size × size` matrix with entries in `[0, u_max]`.
#[no_mangle]
pub unsafe extern "C" fn mbr_utility_from_matrix(
    values: *const f64,
    size: usize,
    u_max: f64,
    out: *mut *mut MbrUtility,
) -> MbrStatus {
    guard(|| {
        let values = slice(values, size.saturating_mul(size), "values")?.to_vec();
        let m = MatrixUtility::new(size, values, u_max)?;
        write_out(out, Box::into_raw(Box::new(MbrUtility(UtilityModel::Matrix(m)))), "out")
    })
}

/// Inner-product utility from row-major `size × dim` embeddings.
#[no_mangle]
pub unsafe extern "C" fn mbr_utility_embedding(
    embeddings: *const f64,
    size: usize,
    dim: usize,
    out: *mut *mut MbrUtility,
) -> MbrStatus {
    guard(|| {
        if dim == 0 {
            return Err(Fail(MbrStatus::InvalidArgument, "dim must be positive".into()));
        }
        let flat = slice(embeddings, size.saturating_mul(dim), "embeddings")?;
        let rows: Vec<Vec<f64>> = flat.chunks(dim).map(<[f64]>::to_vec).collect();
        let e = EmbeddingUtility::from_embeddings(&rows)?;
        write_out(out, Box::into_raw(Box::new(MbrUtility(UtilityModel::Embedding(e)))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn mbr_utility_free(utility: *mut MbrUtility) {
    if !utility.is_null() {
        drop(Box::from_raw(utility));
    }
}

#[no_mangle]
pub unsafe extern "C" fn mbr_utility_value(
    utility: *const MbrUtility,
    y: usize,
    y_ref: usize,
    out: *mut f64,
) -> MbrStatus {
    guard(|| {
        let u = handle(utility, "utility")?;
        write_out(out, u.0.utility(y, y_ref)?, "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn mbr_expected_utility(
    utility: *const MbrUtility,
    dist: *const MbrCategorical,
    target: usize,
    out: *mut f64,
) -> MbrStatus {
    guard(|| {
        let u = handle(utility, "utility")?;
        let d = handle(dist, "dist")?;
        write_out(out, expected_utility(target, &u.0, &d.0)?, "out")
    })
}

/// Exact MBR decision under `dist`.
#[no_mangle]
pub unsafe extern "C" fn mbr_decode_exact(
    utility: *const MbrUtility,
    dist: *const MbrCategorical,
    out_chosen: *mut usize,
    out_score: *mut f64,
) -> MbrStatus {
    guard(|| {
        let u = handle(utility, "utility")?;
        let d = handle(dist, "dist")?;
        let r = decoding::mbr_decode_exact(&u.0, &d.0)?;
        write_out(out_chosen, r.chosen, "out_chosen")?;
        write_out(out_score, r.score, "out_score")
    })
}

/// Monte Carlo MBR decision over the given reference indices.
#[no_mangle]
pub unsafe extern "C" fn mbr_decode_mc(
    utility: *const MbrUtility,
    refs: *const usize,
    count: usize,
    out_chosen: *mut usize,
    out_score: *mut f64,
) -> MbrStatus {
    guard(|| {
        let u = handle(utility, "utility")?;
        let space = Arc::new(HypothesisSpace::new(u.0.size())?);
        let refs = SampleSet::new(space, slice(refs, count, "refs")?.to_vec(), 0)?;
        let r = decoding::mbr_decode_mc(&u.0, &refs)?;
        write_out(out_chosen, r.chosen, "out_chosen")?;
        write_out(out_score, r.score, "out_score")
    })
}

/// Mode of `dist` (lowest index on ties) and its probability.
#[no_mangle]
pub unsafe extern "C" fn mbr_map_decode(
    dist: *const MbrCategorical,
    out_chosen: *mut usize,
    out_prob: *mut f64,
) -> MbrStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let r = map_decode(&d.0);
        write_out(out_chosen, r.chosen, "out_chosen")?;
        write_out(out_prob, r.score, "out_prob")
    })
}

/// Wasserstein distance under a row-major `size × size` cost matrix.
#[no_mangle]
pub unsafe extern "C" fn mbr_wasserstein(
    nu: *const MbrCategorical,
    mu: *const MbrCategorical,
    cost: *const f64,
    size: usize,
    out: *mut f64,
) -> MbrStatus {
    guard(|| {
        let nu = handle(nu, "nu")?;
        let mu = handle(mu, "mu")?;
        let values = slice(cost, size.saturating_mul(size), "cost")?.to_vec();
        let cost = LipschitzCost::new(size, values)?;
        if cost.size() != nu.0.len() {
            return Err(Error::SpaceMismatch {
                left: cost.size(),
                right: nu.0.len(),
            }
            .into());
        }
        write_out(out, wasserstein(&nu.0, &mu.0, &cost)?.distance, "out")
    })
}

/// Evaluate the bound named `kind` (for example `"theorem_bound"`).
/// `raw_form` selects the form before constants were rounded up.
#[no_mangle]
pub unsafe extern "C" fn mbr_bound_eval(
    kind: *const c_char,
    inputs: *const MbrBoundInputs,
    raw_form: bool,
    out: *mut f64,
) -> MbrStatus {
    guard(|| {
        if kind.is_null() {
            return Err(null("kind"));
        }
        let name = CStr::from_ptr(kind)
            .to_str()
            .map_err(|_| Fail(MbrStatus::InvalidArgument, "kind is not UTF-8".into()))?;
        let kind = BoundKind::from_name(name)?;
        let raw = handle(inputs, "inputs")?;
        let mut inputs = BoundInputs::new(raw.n, raw.dim, raw.delta);
        if raw.d_size > 0 {
            inputs = inputs.with_d_size(raw.d_size);
        }
        if let Some(w) = optional(raw.wd_hm) {
            inputs = inputs.with_wd_hm(w);
        }
        if let Some(w) = optional(raw.wd_tt) {
            inputs = inputs.with_wd_tt(w);
        }
        if let Some(a) = optional(raw.alpha_err) {
            inputs = inputs.with_alpha_err(a);
        }
        if let Some(u) = optional(raw.u_max) {
            inputs.u_max = u;
        }
        let form = if raw_form { Form::Raw } else { Form::Published };
        write_out(out, kind.evaluate(&inputs, form)?.value, "out")
    })
}
