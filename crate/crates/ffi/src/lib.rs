//! C ABI over `pacbayes-core`.
//!
//! Every fallible entry point returns a [`PbStatus`]; on failure a message
//! is available from [`pb_last_error_message`] on the same thread. Objects
//! cross the boundary as opaque handles that the caller releases with the
//! matching `*_free` function. Panics never unwind into C: they are caught
//! and reported as [`PbStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use ndarray::{Array1, Array2};

use pacbayes_core::bounds::{bound_rhs_matcomp, bound_rhs_sparse, kl_gaussian_isotropic, BoundConstants};
use pacbayes_core::gibbs::{gibbs_weights, posterior_mean, run_chain, GibbsConfig, PosteriorSamples, ProposalScheme};
use pacbayes_core::harness::{run_experiment, write_outputs, ExperimentSpec};
use pacbayes_core::losses::{empirical_risk, surrogate_loss};
use pacbayes_core::matcomp::{expected_hinge_gaussian, matcomp_chain};
use pacbayes_core::synthdata::{gen_sparse, FeatureLaw, SparseModelSpec};
use pacbayes_core::{Dataset, Design, Error, GammaKind, Loss, LossKind, ParamPoint, PriorSpec};

/// Hinge loss `max(0, 1 - y s)`.
pub const PB_LOSS_HINGE: u32 = 0;
/// Logistic loss `log(1 + exp(-y s))`.
pub const PB_LOSS_LOGISTIC: u32 = 1;
/// Zero-one loss; not accepted where a surrogate is required.
pub const PB_LOSS_ZERO_ONE: u32 = 2;

/// Gamma hyperprior (shape, rate) on the factor scales.
pub const PB_GAMMA: u32 = 0;
/// Inverse-gamma hyperprior (shape, scale) on the factor scales.
pub const PB_INVERSE_GAMMA: u32 = 1;

/// Features uniform on `{-1, +1}^d`.
pub const PB_FEATURES_RADEMACHER: u32 = 0;
/// Features uniform on the unit sphere.
pub const PB_FEATURES_UNIT_SPHERE: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument lies outside the domain of the operation, or an enum
    /// code is unknown.
    Domain = 3,
    /// A parameter lies outside the support of its prior.
    Support = 4,
    DimensionMismatch = 5,
    /// A configuration failed validation or could not be parsed.
    Config = 6,
    /// A sampler exceeded its rejection budget or failed its acceptance
    /// diagnostics.
    Sampling = 7,
    /// The variational objective increased.
    Optimization = 8,
    Io = 9,
    /// An output buffer is smaller than the data to copy.
    BufferTooSmall = 10,
    /// Some experiment cells failed; the others were written.
    PartialFailure = 11,
    Panic = 12,
    Other = 13,
}

/// Dataset handle.
pub struct PbDataset(Dataset);
/// Prior handle.
pub struct PbPrior(PriorSpec);
/// Posterior draws from a chain.
pub struct PbSamples(PosteriorSamples);
/// Parsed experiment configuration.
pub struct PbExperiment(ExperimentSpec);

/// Random-walk Metropolis settings.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PbChainConfig {
    pub lambda: f64,
    pub n_steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub proposal_scale: f64,
    pub seed: u64,
    /// Sweep single-coordinate moves instead of joint moves (vector priors).
    pub coordinatewise: bool,
    /// Tune proposal scales during burn-in.
    pub adapt: bool,
    pub jump_prob: f64,
    pub jump_scale: f64,
}

/// Loss and margin constants of the bounds; `psi` multiplies the bound.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PbBoundConstants {
    pub b_loss: f64,
    pub l_lip: f64,
    pub k_bernstein: f64,
    pub c_margin: f64,
    pub psi: f64,
}

enum Failure {
    Null(&'static str),
    Utf8(&'static str),
    Buffer { needed: usize, given: usize },
    Partial(usize),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn core_status(e: &Error) -> PbStatus {
    match e {
        Error::Domain(_) | Error::NotSurrogate | Error::InfiniteKl { .. } | Error::IndexOutOfRange { .. } => PbStatus::Domain,
        Error::Support(_) => PbStatus::Support,
        Error::DimensionMismatch { .. } => PbStatus::DimensionMismatch,
        Error::Config(_) | Error::Json(_) => PbStatus::Config,
        Error::Sampling { .. } | Error::Diagnostics { .. } => PbStatus::Sampling,
        Error::Optimization { .. } => PbStatus::Optimization,
        Error::Io(_) | Error::Csv(_) => PbStatus::Io,
        Error::Cell { source, .. } => core_status(source),
        _ => PbStatus::Other,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> PbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PbStatus::Ok,
        Ok(Err(failure)) => {
            let (status, msg) = match failure {
                Failure::Null(name) => (PbStatus::NullPointer, format!("null pointer passed as `{name}`")),
                Failure::Utf8(name) => (PbStatus::InvalidUtf8, format!("`{name}` is not valid UTF-8")),
                Failure::Buffer { needed, given } => (
                    PbStatus::BufferTooSmall,
                    format!("output buffer holds {given} values, {needed} needed"),
                ),
                Failure::Partial(failed) => (PbStatus::PartialFailure, format!("{failed} experiment cells failed")),
                Failure::Core(e) => (core_status(&e), e.to_string()),
            };
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            PbStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &'static str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn string(p: *const c_char, name: &'static str) -> Result<String, Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    CStr::from_ptr(p).to_str().map(str::to_owned).map_err(|_| Failure::Utf8(name))
}

fn loss_kind(code: u32) -> Result<Loss, Failure> {
    Ok(Loss::new(match code {
        PB_LOSS_HINGE => LossKind::Hinge,
        PB_LOSS_LOGISTIC => LossKind::Logistic,
        PB_LOSS_ZERO_ONE => LossKind::ZeroOne,
        other => return Err(Error::Domain(format!("unknown loss code {other}")).into()),
    }))
}

fn constants(c: &PbBoundConstants) -> Result<BoundConstants, Failure> {
    Ok(BoundConstants::new(c.b_loss, c.l_lip, c.k_bernstein, c.c_margin)?.with_psi(c.psi)?)
}

fn copy_into(values: &[f64], out: &mut [f64]) -> Result<(), Failure> {
    if out.len() < values.len() {
        return Err(Failure::Buffer {
            needed: values.len(),
            given: out.len(),
        });
    }
    out[..values.len()].copy_from_slice(values);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL if none. The pointer
/// stays valid until the next failing call or [`pb_clear_error`] on the same
/// thread.
#[no_mangle]
pub extern "C" fn pb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn pb_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

// ------------------------------------------------------------ datasets

/// Dense dataset from a row-major `n x d` feature matrix and `n` labels in
/// `{-1, +1}`. `cond_prob` (length `n`, `P(y = 1 | x)`) may be NULL.
///
/// # Safety
/// `x` must point to `n * d` readable doubles, `labels` to `n`, and
/// `cond_prob` to `n` when not NULL. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_dataset_new_dense(
    x: *const f64,
    n: usize,
    d: usize,
    labels: *const f64,
    cond_prob: *const f64,
    out: *mut *mut PbDataset,
) -> PbStatus {
    guard(|| {
        let len = n.checked_mul(d).ok_or_else(|| Error::Domain("n * d overflows".into()))?;
        let x = Array2::from_shape_vec((n, d), slice(x, len, "x")?.to_vec()).map_err(|e| Error::Domain(e.to_string()))?;
        let labels = slice(labels, n, "labels")?.to_vec();
        let p = if cond_prob.is_null() { None } else { Some(slice(cond_prob, n, "cond_prob")?.to_vec()) };
        let data = Dataset::new(Design::Dense(x), labels, p)?;
        write_out(out, Box::into_raw(Box::new(PbDataset(data))), "out")
    })
}

/// Entry-observation dataset for a `rows x cols` matrix: observation `t` is
/// entry `(row_idx[t], col_idx[t])` with label `labels[t]`. `cond_prob` may
/// be NULL.
///
/// # Safety
/// `row_idx`, `col_idx` and `labels` must point to `n` readable values, and
/// `cond_prob` to `n` when not NULL. `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_dataset_new_entries(
    rows: usize,
    cols: usize,
    row_idx: *const usize,
    col_idx: *const usize,
    labels: *const f64,
    n: usize,
    cond_prob: *const f64,
    out: *mut *mut PbDataset,
) -> PbStatus {
    guard(|| {
        let r = slice(row_idx, n, "row_idx")?;
        let c = slice(col_idx, n, "col_idx")?;
        let index = r.iter().copied().zip(c.iter().copied()).collect();
        let labels = slice(labels, n, "labels")?.to_vec();
        let p = if cond_prob.is_null() { None } else { Some(slice(cond_prob, n, "cond_prob")?.to_vec()) };
        let data = Dataset::new(Design::Entries { rows, cols, index }, labels, p)?;
        write_out(out, Box::into_raw(Box::new(PbDataset(data))), "out")
    })
}

/// Draws `n` observations from the sparse linear model. When `theta_star`
/// is not NULL the Bayes direction (length `d`) is written there.
///
/// # Safety
/// `out` must be writable; `theta_star`, when not NULL, must hold `d`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pb_dataset_generate_sparse(
    d: usize,
    s_star: usize,
    signal: f64,
    h: f64,
    feature_law: u32,
    n: usize,
    seed: u64,
    out: *mut *mut PbDataset,
    theta_star: *mut f64,
) -> PbStatus {
    guard(|| {
        let feature_law = match feature_law {
            PB_FEATURES_RADEMACHER => FeatureLaw::RademacherGrid,
            PB_FEATURES_UNIT_SPHERE => FeatureLaw::UnitSphere,
            other => return Err(Error::Domain(format!("unknown feature law code {other}")).into()),
        };
        let spec = SparseModelSpec {
            d,
            s_star,
            signal,
            h,
            feature_law,
        };
        let (data, star) = gen_sparse(&spec, n, seed)?;
        if !theta_star.is_null() {
            copy_into(star.as_slice().expect("contiguous"), slice_mut(theta_star, d, "theta_star")?)?;
        }
        write_out(out, Box::into_raw(Box::new(PbDataset(data))), "out")
    })
}

/// Number of observations; 0 for NULL.
///
/// # Safety
/// `data` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_dataset_len(data: *const PbDataset) -> usize {
    data.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `data` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pb_dataset_free(data: *mut PbDataset) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

// ------------------------------------------------------------ priors

unsafe fn new_prior(prior: PriorSpec, out: *mut *mut PbPrior) -> Result<(), Failure> {
    prior.validate()?;
    write_out(out, Box::into_raw(Box::new(PbPrior(prior))), "out")
}

/// Isotropic Gaussian `N(0, sigma^2 I_d)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_prior_gaussian(sigma: f64, d: usize, out: *mut *mut PbPrior) -> PbStatus {
    guard(|| new_prior(PriorSpec::IsotropicGaussian { sigma, d }, out))
}

/// Product of scaled Student-t(3) densities restricted to the L1 ball of
/// radius `c1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_prior_student(tau: f64, c1: f64, d: usize, out: *mut *mut PbPrior) -> PbStatus {
    guard(|| new_prior(PriorSpec::ScaledStudent { tau, c1, d }, out))
}

/// Hierarchical low-rank prior on `d1 x k` and `d2 x k` factors with a
/// [`PB_GAMMA`] or [`PB_INVERSE_GAMMA`] hyperprior `(a, b)` on the column
/// scales.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_prior_low_rank(
    d1: usize,
    d2: usize,
    k_rank: usize,
    a: f64,
    b: f64,
    gamma_kind: u32,
    out: *mut *mut PbPrior,
) -> PbStatus {
    guard(|| {
        let gamma_kind = match gamma_kind {
            PB_GAMMA => GammaKind::Gamma,
            PB_INVERSE_GAMMA => GammaKind::InverseGamma,
            other => return Err(Error::Domain(format!("unknown hyperprior code {other}")).into()),
        };
        new_prior(
            PriorSpec::LowRankHier {
                d1,
                d2,
                k_rank,
                a,
                b,
                gamma_kind,
            },
            out,
        )
    })
}

/// # Safety
/// `prior` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pb_prior_free(prior: *mut PbPrior) {
    if !prior.is_null() {
        drop(Box::from_raw(prior));
    }
}

// ------------------------------------------------------------ losses and weights

/// Loss at label `y` and score `score`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_loss(loss: u32, y: f64, score: f64, out: *mut f64) -> PbStatus {
    guard(|| {
        let loss = loss_kind(loss)?;
        let v = if loss.is_surrogate() { surrogate_loss(loss, y, score)? } else { loss.eval(y, score)? };
        write_out(out, v, "out")
    })
}

/// Empirical risk of the linear predictor `theta` (length `d`) on a dense
/// dataset.
///
/// # Safety
/// `data` must be a live handle, `theta` must point to `d` readable
/// doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_empirical_risk(data: *const PbDataset, loss: u32, theta: *const f64, d: usize, out: *mut f64) -> PbStatus {
    guard(|| {
        let data = handle(data, "data")?;
        let theta = ParamPoint::Vector(Array1::from(slice(theta, d, "theta")?.to_vec()));
        write_out(out, empirical_risk(loss_kind(loss)?, &data.0, &theta)?, "out")
    })
}

/// Normalised Gibbs weights `w_m ∝ prior_m exp(-lambda risk_m)` over `m`
/// candidates.
///
/// # Safety
/// `risks` and `prior_weights` must point to `m` readable doubles and
/// `out_weights` to `m` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pb_gibbs_weights(
    risks: *const f64,
    prior_weights: *const f64,
    m: usize,
    lambda: f64,
    out_weights: *mut f64,
) -> PbStatus {
    guard(|| {
        let w = gibbs_weights(slice(risks, m, "risks")?, slice(prior_weights, m, "prior_weights")?, lambda)?;
        copy_into(&w, slice_mut(out_weights, m, "out_weights")?)
    })
}

/// `E max(0, 1 - Z)` for `Z ~ N(mu, s^2)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_expected_hinge_gaussian(mu: f64, s: f64, out: *mut f64) -> PbStatus {
    guard(|| {
        if !(s >= 0.0) || !s.is_finite() || !mu.is_finite() {
            return Err(Error::Domain(format!("need finite mu and s >= 0, got ({mu}, {s})")).into());
        }
        write_out(out, expected_hinge_gaussian(mu, s), "out")
    })
}

// ------------------------------------------------------------ bounds

/// `KL(N(m, s^2 I) || N(0, sigma^2 I))` for a mean of length `d`.
///
/// # Safety
/// `m` must point to `d` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_kl_gaussian_isotropic(m: *const f64, d: usize, s: f64, sigma: f64, out: *mut f64) -> PbStatus {
    guard(|| write_out(out, kl_gaussian_isotropic(slice(m, d, "m")?, s, sigma)?, "out"))
}

/// Bound right-hand side for sparse linear classification under the
/// scaled Student prior.
///
/// # Safety
/// `c` must point to readable constants and `out_total` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_bound_rhs_sparse(
    c: *const PbBoundConstants,
    d: usize,
    s_star: usize,
    c1: f64,
    c_x: f64,
    n: usize,
    tau: f64,
    out_total: *mut f64,
) -> PbStatus {
    guard(|| {
        let k = constants(handle(c, "c")?)?;
        write_out(out_total, bound_rhs_sparse(&k, d, s_star, c1, c_x, n, tau, None)?.total, "out_total")
    })
}

/// Bound right-hand side for one-bit matrix completion with the
/// hierarchical prior.
///
/// # Safety
/// `c` must point to readable constants and `out_total` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_bound_rhs_matcomp(
    c: *const PbBoundConstants,
    r: usize,
    d1: usize,
    d2: usize,
    n: usize,
    a: f64,
    b_inf: f64,
    out_total: *mut f64,
) -> PbStatus {
    guard(|| {
        let k = constants(handle(c, "c")?)?;
        write_out(out_total, bound_rhs_matcomp(r, d1, d2, n, a, b_inf, &k)?.total, "out_total")
    })
}

// ------------------------------------------------------------ sampling

/// Runs a Gibbs-posterior chain. Vector priors use the linear chain on a
/// dense dataset; the low-rank prior uses the block factor chain on an
/// entry dataset (hinge loss only).
///
/// # Safety
/// `data`, `prior` and `config` must be live, readable pointers and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_run_chain(
    data: *const PbDataset,
    prior: *const PbPrior,
    loss: u32,
    config: *const PbChainConfig,
    out: *mut *mut PbSamples,
) -> PbStatus {
    guard(|| {
        let data = handle(data, "data")?;
        let prior = handle(prior, "prior")?;
        let c = handle(config, "config")?;
        let loss = loss_kind(loss)?;
        let cfg = GibbsConfig {
            lambda: c.lambda,
            n_steps: c.n_steps,
            burn_in: c.burn_in,
            proposal_scale: c.proposal_scale,
            thin: c.thin,
            seed: c.seed,
            scheme: if c.coordinatewise { ProposalScheme::Coordinatewise } else { ProposalScheme::Joint },
            adapt: c.adapt,
            preconditioner: None,
            init: None,
            jump_prob: c.jump_prob,
            jump_scale: c.jump_scale,
        };
        let samples = match prior.0 {
            PriorSpec::LowRankHier { .. } => {
                if loss.kind != LossKind::Hinge {
                    return Err(Error::Domain("the factor chain uses the hinge loss".into()).into());
                }
                matcomp_chain(&cfg, &data.0, &prior.0)?
            }
            _ => run_chain(&cfg, &data.0, loss, &prior.0)?,
        };
        write_out(out, Box::into_raw(Box::new(PbSamples(samples))), "out")
    })
}

/// Number of retained draws; 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_samples_count(s: *const PbSamples) -> usize {
    s.as_ref().map_or(0, |s| s.0.draws.len())
}

/// Length of one flattened draw (factors: `L`, `R`, then the scales, each
/// row-major); 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_samples_width(s: *const PbSamples) -> usize {
    s.as_ref().and_then(|s| s.0.draws.first()).map_or(0, |d| d.flatten().len())
}

/// Acceptance rate of the chain; NaN for NULL.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pb_samples_acceptance_rate(s: *const PbSamples) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.0.acceptance_rate)
}

/// Copies all draws, row-major (`count x width`), into `out`.
///
/// # Safety
/// `s` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pb_samples_copy(s: *const PbSamples, out: *mut f64, len: usize) -> PbStatus {
    guard(|| {
        let s = handle(s, "s")?;
        let flat: Vec<f64> = s.0.draws.iter().flat_map(|d| d.flatten()).collect();
        copy_into(&flat, slice_mut(out, len, "out")?)
    })
}

/// Writes the posterior-mean predictor: the mean vector for linear chains,
/// the mean of `L R^T` (row-major `d1 x d2`) for factor chains. The length
/// written is stored in `out_written` when not NULL.
///
/// # Safety
/// `s` must be a live handle, `out` must hold `len` writable doubles and
/// `out_written` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pb_samples_mean(s: *const PbSamples, out: *mut f64, len: usize, out_written: *mut usize) -> PbStatus {
    guard(|| {
        let s = handle(s, "s")?;
        let mean = posterior_mean(&s.0)?.flatten();
        copy_into(&mean, slice_mut(out, len, "out")?)?;
        if !out_written.is_null() {
            out_written.write(mean.len());
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pb_samples_free(s: *mut PbSamples) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

// ------------------------------------------------------------ experiments

/// Parses and validates an experiment configuration (the JSON accepted by
/// `pacbayes --config`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pb_experiment_from_json(json: *const c_char, out: *mut *mut PbExperiment) -> PbStatus {
    guard(|| {
        let spec: ExperimentSpec = serde_json::from_str(&string(json, "json")?).map_err(Error::from)?;
        spec.validate()?;
        write_out(out, Box::into_raw(Box::new(PbExperiment(spec))), "out")
    })
}

/// Runs every cell and writes the report files into `out_dir`. The fitted
/// slope of the randomized-classifier column (NaN when unavailable) goes to
/// `out_slope` when not NULL. Returns [`PbStatus::PartialFailure`] when some
/// cells failed; the reports and failure manifest are still written.
///
/// # Safety
/// `exp` must be a live handle, `out_dir` a NUL-terminated string and
/// `out_slope` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn pb_experiment_run(exp: *const PbExperiment, out_dir: *const c_char, out_slope: *mut f64) -> PbStatus {
    guard(|| {
        let spec = &handle(exp, "exp")?.0;
        let dir = PathBuf::from(string(out_dir, "out_dir")?);
        let outcome = run_experiment(spec)?;
        let summary = write_outputs(&dir, spec, &outcome)?;
        if !out_slope.is_null() {
            out_slope.write(summary.slope.unwrap_or(f64::NAN));
        }
        match outcome.failures.len() {
            0 => Ok(()),
            k => Err(Failure::Partial(k)),
        }
    })
}

/// # Safety
/// `exp` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pb_experiment_free(exp: *mut PbExperiment) {
    if !exp.is_null() {
        drop(Box::from_raw(exp));
    }
}
