//! C ABI for `powertower`.
//!
//! Every fallible function returns a [`PtStatus`] and writes results through
//! out-pointers. On failure a message is kept per thread and can be read with
//! [`pt_last_error`]. Distributions and inverse tower laws are opaque handles
//! created by `*_new`/`*_from_json` and released by the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use powertower::alt;
use powertower::classify::{self, Outcome, Rule, SupportBounds, TailCondition};
use powertower::invtower::{InvTowerCdf, InvTowerParams};
use powertower::sim::{self, DistributionSpec};
use powertower::stats;
use powertower::xfun;
use powertower::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtStatus {
    PtOk = 0,
    PtErrNullPointer = 1,
    PtErrDomain = 2,
    PtErrConvergence = 3,
    PtErrInvalidBounds = 4,
    PtErrUnsupportedDistribution = 5,
    PtErrPrecondition = 6,
    PtErrInsufficientSamples = 7,
    PtErrInfeasible = 8,
    PtErrDegenerateCase = 9,
    PtErrInvalidSpec = 10,
    PtErrInvalidUtf8 = 11,
    PtErrPanic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtOutcome {
    PtConvergesAs = 0,
    PtDivergesToInfinityAs = 1,
    PtDivergesByOscillation = 2,
    PtIndeterminate = 3,
}

impl From<Outcome> for PtOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::ConvergesAS => PtOutcome::PtConvergesAs,
            Outcome::DivergesToInfinityAS => PtOutcome::PtDivergesToInfinityAs,
            Outcome::DivergesByOscillation => PtOutcome::PtDivergesByOscillation,
            Outcome::Indeterminate => PtOutcome::PtIndeterminate,
        }
    }
}

/// Verdict of the classifier; `rule` is a static NUL-terminated identifier.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PtVerdict {
    pub outcome: PtOutcome,
    pub rule: *const c_char,
}

/// Opaque base distribution.
pub struct PtDist {
    spec: DistributionSpec,
}

/// Opaque inverse tower distribution function.
pub struct PtInvTower {
    cdf: InvTowerCdf,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PtStatus {
    match e {
        Error::Domain(_) => PtStatus::PtErrDomain,
        Error::Convergence(_) => PtStatus::PtErrConvergence,
        Error::InvalidBounds(_) => PtStatus::PtErrInvalidBounds,
        Error::UnsupportedDistribution(_) => PtStatus::PtErrUnsupportedDistribution,
        Error::Precondition(_) => PtStatus::PtErrPrecondition,
        Error::InsufficientSamples { .. } => PtStatus::PtErrInsufficientSamples,
        Error::Infeasible(_) => PtStatus::PtErrInfeasible,
        Error::DegenerateCase(_) => PtStatus::PtErrDegenerateCase,
        Error::InvalidSpec(_) => PtStatus::PtErrInvalidSpec,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
    Status(PtStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> PtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtStatus::PtOk,
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            PtStatus::PtErrNullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PtStatus::PtErrPanic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, name: &'static str) -> Result<&'a mut [f64], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn rule_cstr(rule: Rule) -> *const c_char {
    let s: &'static CStr = match rule {
        Rule::CorConv1 => c"Cor-conv-1",
        Rule::Thm1Case1 => c"Thm1-case1",
        Rule::CorConv2 => c"Cor-conv-2",
        Rule::CorConv3 => c"Cor-conv-3",
        Rule::Thm1Case3 => c"Thm1-case3",
        Rule::CorDiv1 => c"Cor-div-1",
        Rule::Thm1Case2 => c"Thm1-case2",
        Rule::CorConv5 => c"Cor-conv-5",
        Rule::CorDiv3 => c"Cor-div-3",
        Rule::OpenUnbounded => c"Open-unbounded",
    };
    s.as_ptr()
}

/// Message for the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pt_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(c) => c,
        Err(_) => panic!("version has no interior NUL"),
    };
    VERSION.as_ptr()
}

/// Principal branch of the Lambert W function.
///
/// # Safety
/// `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_lambert_w0(x: f64, out_value: *mut f64) -> PtStatus {
    guard(|| {
        *out(out_value, "out_value")? = xfun::lambert_w0(x)?.value;
        Ok(())
    })
}

/// Infinite tower `C(x)` for `x` in `(0, 1]`.
///
/// # Safety
/// `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_tower_limit_c(x: f64, out_value: *mut f64) -> PtStatus {
    guard(|| {
        *out(out_value, "out_value")? = xfun::tower_limit_c(x)?;
        Ok(())
    })
}

/// Boundary function `G(x)` for `x` in `(0, 1]`.
///
/// # Safety
/// `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_g_boundary(x: f64, out_value: *mut f64) -> PtStatus {
    guard(|| {
        *out(out_value, "out_value")? = xfun::g_boundary(x)?;
        Ok(())
    })
}

/// Bisection oracle for `G(x)`.
///
/// # Safety
/// `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_h_oracle(x: f64, out_value: *mut f64) -> PtStatus {
    guard(|| {
        *out(out_value, "out_value")? = alt::h_oracle(x)?;
        Ok(())
    })
}

/// `log★` of a double; 0 for `x <= 1`.
///
/// # Safety
/// `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_log_star(x: f64, out_value: *mut u64) -> PtStatus {
    guard(|| {
        if x.is_nan() {
            return Err(Error::Domain("log_star of NaN".into()).into());
        }
        *out(out_value, "out_value")? = xfun::log_star_f64(x);
        Ok(())
    })
}

/// Even and odd limits of the alternating tower `x^(y^(x^…))`.
///
/// # Safety
/// `out_even` and `out_odd` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_at_limits(x: f64, y: f64, tol: f64, out_even: *mut f64, out_odd: *mut f64) -> PtStatus {
    guard(|| {
        let e = out(out_even, "out_even")?;
        let o = out(out_odd, "out_odd")?;
        (*e, *o) = alt::at_limits(x, y, tol)?;
        Ok(())
    })
}

/// Classifies from support bounds alone (tail unknown).
///
/// # Safety
/// `out_verdict` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_classify_bounds(a: f64, b: f64, out_verdict: *mut PtVerdict) -> PtStatus {
    guard(|| {
        let v = classify::classify_bounds(SupportBounds { a, b }, &TailCondition::Unknown)?;
        *out(out_verdict, "out_verdict")? = PtVerdict { outcome: v.outcome.into(), rule: rule_cstr(v.rule) };
        Ok(())
    })
}

/// Parses a distribution from `{"family": ..., "params": {...}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_dist` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_dist_from_json(json: *const c_char, out_dist: *mut *mut PtDist) -> PtStatus {
    guard(|| {
        let slot = out(out_dist, "out_dist")?;
        *slot = ptr::null_mut();
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail::Status(PtStatus::PtErrInvalidUtf8, e.to_string()))?;
        let spec = DistributionSpec::from_json(text)?;
        *slot = Box::into_raw(Box::new(PtDist { spec }));
        Ok(())
    })
}

/// Releases a distribution; NULL is ignored.
///
/// # Safety
/// `dist` must come from [`pt_dist_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pt_dist_free(dist: *mut PtDist) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// Support bounds `(a, b)` of a distribution.
///
/// # Safety
/// `dist` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_dist_support(dist: *const PtDist, out_a: *mut f64, out_b: *mut f64) -> PtStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let sb = d.spec.support();
        *out(out_a, "out_a")? = sb.a;
        *out(out_b, "out_b")? = sb.b;
        Ok(())
    })
}

/// Classifies a distribution, using its analytic tail when `a = 1`.
///
/// # Safety
/// `dist` must be a live handle; `out_verdict` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_dist_classify(dist: *const PtDist, out_verdict: *mut PtVerdict) -> PtStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let v = classify::classify_distribution(&d.spec)?;
        *out(out_verdict, "out_verdict")? = PtVerdict { outcome: v.outcome.into(), rule: rule_cstr(v.rule) };
        Ok(())
    })
}

/// `paths` draws of `T_depth` written to `out_values[0..paths]` (`+inf` for
/// values beyond double range). `backward` selects the linear-time chain.
///
/// # Safety
/// `dist` must be a live handle; `out_values` must hold `paths` doubles.
#[no_mangle]
pub unsafe extern "C" fn pt_dist_sample_towers(
    dist: *const PtDist,
    depth: usize,
    paths: usize,
    seed: u64,
    backward: bool,
    out_values: *mut f64,
) -> PtStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let dst = out_slice(out_values, paths, "out_values")?;
        if depth == 0 {
            return Err(Error::Precondition("depth must be positive".into()).into());
        }
        let s = if backward {
            sim::backward_samples(&d.spec, depth, paths, seed)
        } else {
            sim::forward_finals(&d.spec, depth, paths, seed)
        };
        for (o, v) in dst.iter_mut().zip(&s) {
            *o = v.value.to_f64();
        }
        Ok(())
    })
}

/// Mean even and odd tower values and their difference at height `depth`.
///
/// # Safety
/// `dist` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_dist_oscillation_gap(
    dist: *const PtDist,
    depth: usize,
    paths: usize,
    seed: u64,
    out_even: *mut f64,
    out_odd: *mut f64,
    out_median_gap: *mut f64,
) -> PtStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let r = sim::oscillation_gap(&d.spec, depth, paths, seed)?;
        *out(out_even, "out_even")? = r.even_limit_est;
        *out(out_odd, "out_odd")? = r.odd_limit_est;
        *out(out_median_gap, "out_median_gap")? = r.per_path_gaps.median;
        Ok(())
    })
}

/// Monte Carlo `E[min(N, n_cap)]` with its standard error and censored fraction.
///
/// # Safety
/// `dist` must be a live handle; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_dist_stopping_time(
    dist: *const PtDist,
    n_cap: usize,
    paths: usize,
    seed: u64,
    out_mean: *mut f64,
    out_std_error: *mut f64,
    out_censored_fraction: *mut f64,
) -> PtStatus {
    guard(|| {
        let d = handle(dist, "dist")?;
        let e = sim::estimate_stopping_time(&d.spec, n_cap, paths, seed)?;
        *out(out_mean, "out_mean")? = e.mean_censored;
        *out(out_std_error, "out_std_error")? = e.std_error;
        *out(out_censored_fraction, "out_censored_fraction")? = e.censored_fraction;
        Ok(())
    })
}

/// Whether `U^r`, `U ~ Unif[alpha, beta]`, has a tower distribution.
///
/// # Safety
/// `out_feasible` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_invtower_feasible(alpha: f64, beta: f64, r: f64, out_feasible: *mut bool) -> PtStatus {
    guard(|| {
        *out(out_feasible, "out_feasible")? = InvTowerParams::new(alpha, beta, r).feasibility().feasible;
        Ok(())
    })
}

/// Builds the inverse tower CDF; fails with `PtErrInfeasible` when no tower
/// distribution exists.
///
/// # Safety
/// `out_handle` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_invtower_new(alpha: f64, beta: f64, r: f64, out_handle: *mut *mut PtInvTower) -> PtStatus {
    guard(|| {
        let slot = out(out_handle, "out_handle")?;
        *slot = ptr::null_mut();
        let cdf = InvTowerCdf::new(InvTowerParams::new(alpha, beta, r))?;
        *slot = Box::into_raw(Box::new(PtInvTower { cdf }));
        Ok(())
    })
}

/// Releases an inverse tower handle; NULL is ignored.
///
/// # Safety
/// `h` must come from [`pt_invtower_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pt_invtower_free(h: *mut PtInvTower) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// `F(x)`.
///
/// # Safety
/// `h` must be a live handle; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_invtower_cdf(h: *const PtInvTower, x: f64, out_value: *mut f64) -> PtStatus {
    guard(|| {
        *out(out_value, "out_value")? = handle(h, "h")?.cdf.eval(x);
        Ok(())
    })
}

/// Generalized inverse `inf{x : F(x) >= u}`.
///
/// # Safety
/// `h` must be a live handle; `out_value` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_invtower_quantile(h: *const PtInvTower, u: f64, out_value: *mut f64) -> PtStatus {
    guard(|| {
        *out(out_value, "out_value")? = handle(h, "h")?.cdf.inv_sample(u)?;
        Ok(())
    })
}

/// One-sample Kolmogorov-Smirnov test of `samples` against the continuous
/// CDF `cdf(x, ctx)`.
///
/// # Safety
/// `samples` must hold `n` doubles; the out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pt_ks_one_sample(
    samples: *const f64,
    n: usize,
    cdf: Option<extern "C" fn(x: f64, ctx: *mut c_void) -> f64>,
    ctx: *mut c_void,
    out_statistic: *mut f64,
    out_p_value: *mut f64,
) -> PtStatus {
    guard(|| {
        let cdf = cdf.ok_or(Fail::Null("cdf"))?;
        if samples.is_null() && n > 0 {
            return Err(Fail::Null("samples"));
        }
        let xs = if n == 0 { &[][..] } else { slice::from_raw_parts(samples, n) };
        let r = stats::ks_one_sample(xs, |x| cdf(x, ctx))?;
        *out(out_statistic, "out_statistic")? = r.statistic;
        *out(out_p_value, "out_p_value")? = r.p_value;
        Ok(())
    })
}
