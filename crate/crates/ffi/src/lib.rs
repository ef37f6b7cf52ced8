//! C ABI over `pldist`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! a [`PldStatus`]; on failure a message is available from
//! [`pld_last_error`] on the same thread. Strings returned through `char**`
//! out-parameters are owned by the caller and released with
//! [`pld_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pldist::experiment::Construction;
use pldist::lab::{empirical_distortion, population_distortion, population_winner_from_stats, rule_bounds};
use pldist::{population_stats, Error, Instance, Rule, TallyStats, TieBreakOrder};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PldStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    InvalidInstance = 4,
    Precondition = 5,
    UnknownRule = 6,
    UnsupportedRule = 7,
    /// The population outcome is decided by a margin below the tolerance.
    Ambiguous = 8,
    NonConvergence = 9,
    Io = 10,
    Json = 11,
    Internal = 12,
    Panic = 13,
}

/// An election instance.
pub struct PldInstance {
    inner: Instance,
}

/// Counts of one simulated election.
pub struct PldTally {
    inner: TallyStats,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PldStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) => PldStatus::InvalidArgument,
            Error::InvalidInstance(_) => PldStatus::InvalidInstance,
            Error::Precondition(_) => PldStatus::Precondition,
            Error::UnknownRule(_) => PldStatus::UnknownRule,
            Error::UnsupportedRule(_) => PldStatus::UnsupportedRule,
            Error::NonConvergence { .. } => PldStatus::NonConvergence,
            Error::Io(_) => PldStatus::Io,
            Error::Json(_) => PldStatus::Json,
            _ => PldStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(PldStatus::Json, e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Res<()>) -> PldStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PldStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            PldStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PldStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(PldStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Res<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

fn c_string(s: String) -> Res<*mut c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(PldStatus::Internal, e.to_string()))
}

fn rule(name: &str) -> Res<Rule> {
    Ok(name.parse::<Rule>()?)
}

/// Copies the calling thread's last error message into a new string, or
/// returns null when there is none. Release with [`pld_string_free`].
#[no_mangle]
pub extern "C" fn pld_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pld_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pld_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an instance from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_instance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pld_instance_from_json(json: *const c_char, out_instance: *mut *mut PldInstance) -> PldStatus {
    guard(|| {
        let slot = out(out_instance, "out_instance")?;
        let inner = Instance::from_json(str_arg(json, "json")?)?;
        *slot = Box::into_raw(Box::new(PldInstance { inner }));
        Ok(())
    })
}

/// An instance whose whole electorate shares one utility vector of length `m`.
///
/// # Safety
/// `utilities` must point to `m` doubles and `out_instance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pld_instance_single(
    beta: f64,
    utilities: *const f64,
    m: usize,
    out_instance: *mut *mut PldInstance,
) -> PldStatus {
    guard(|| {
        let slot = out(out_instance, "out_instance")?;
        if utilities.is_null() {
            return Err(null("utilities"));
        }
        let u = std::slice::from_raw_parts(utilities, m).to_vec();
        *slot = Box::into_raw(Box::new(PldInstance { inner: Instance::single(beta, u)? }));
        Ok(())
    })
}

/// # Safety
/// `instance` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pld_instance_free(instance: *mut PldInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Number of candidates, or 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pld_instance_num_candidates(instance: *const PldInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.inner.m())
}

/// Serializes an instance to JSON.
///
/// # Safety
/// `instance` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pld_instance_to_json(instance: *const PldInstance, out_json: *mut *mut c_char) -> PldStatus {
    guard(|| {
        let slot = out(out_json, "out_json")?;
        *slot = c_string(handle(instance, "instance")?.inner.to_json())?;
        Ok(())
    })
}

/// Builds a lower-bound construction from its JSON description, e.g.
/// `{"family": "copeland", "beta": 30, "epsilon": 0.1}`. Either output may be
/// null when not wanted.
///
/// # Safety
/// `description` must be a NUL-terminated string; outputs must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn pld_construct(
    description: *const c_char,
    out_instance: *mut *mut PldInstance,
    out_report_json: *mut *mut c_char,
) -> PldStatus {
    guard(|| {
        let c: Construction = serde_json::from_str(str_arg(description, "description")?)?;
        let report = c.build()?;
        if let Some(slot) = out_report_json.as_mut() {
            *slot = c_string(report.to_json())?;
        }
        if let Some(slot) = out_instance.as_mut() {
            *slot = Box::into_raw(Box::new(PldInstance { inner: report.instance }));
        }
        Ok(())
    })
}

/// Simulates `n` voters and tallies their rankings.
///
/// # Safety
/// `instance` must be a live handle and `out_tally` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pld_sample_tally(
    instance: *const PldInstance,
    n: usize,
    seed: u64,
    out_tally: *mut *mut PldTally,
) -> PldStatus {
    guard(|| {
        let slot = out(out_tally, "out_tally")?;
        let inner = pldist::sampling::sample_tally_with_profile(&handle(instance, "instance")?.inner, n, seed)?;
        *slot = Box::into_raw(Box::new(PldTally { inner }));
        Ok(())
    })
}

/// # Safety
/// `tally` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pld_tally_free(tally: *mut PldTally) {
    if !tally.is_null() {
        drop(Box::from_raw(tally));
    }
}

/// Number of voters ranking `j` above `k`.
///
/// # Safety
/// `tally` must be a live handle and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pld_tally_wins(tally: *const PldTally, j: usize, k: usize, out_count: *mut u64) -> PldStatus {
    guard(|| {
        let slot = out(out_count, "out_count")?;
        let t = &handle(tally, "tally")?.inner;
        if j >= t.m() || k >= t.m() {
            return Err(Failure(PldStatus::InvalidArgument, format!("candidate out of range 0..{}", t.m())));
        }
        *slot = t.wins(j, k);
        Ok(())
    })
}

/// Applies a rule (by name, e.g. `"copeland"` or `"ppv:0.5"`) with the
/// identity tie-break and writes its lottery into `lottery[0..m]`.
///
/// # Safety
/// `tally` must be a live handle, `rule_name` NUL-terminated and `lottery`
/// point to `m` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pld_apply_rule(
    tally: *const PldTally,
    rule_name: *const c_char,
    lottery: *mut f64,
    m: usize,
) -> PldStatus {
    guard(|| {
        let t = &handle(tally, "tally")?.inner;
        let r = rule(str_arg(rule_name, "rule_name")?)?;
        if lottery.is_null() {
            return Err(null("lottery"));
        }
        if m != t.m() {
            return Err(Failure(PldStatus::InvalidArgument, format!("lottery has {m} slots for {} candidates", t.m())));
        }
        let o = r.apply(t, &TieBreakOrder::identity(m))?;
        std::slice::from_raw_parts_mut(lottery, m).copy_from_slice(&o.lottery);
        Ok(())
    })
}

/// Population-limit distortion of a rule; `PLD_STATUS_AMBIGUOUS` when the
/// limit outcome is decided by a margin below `tau`.
///
/// # Safety
/// `instance` must be a live handle, `rule_name` NUL-terminated and
/// `out_distortion` valid.
#[no_mangle]
pub unsafe extern "C" fn pld_population_distortion(
    instance: *const PldInstance,
    rule_name: *const c_char,
    tau: f64,
    out_distortion: *mut f64,
) -> PldStatus {
    guard(|| {
        let slot = out(out_distortion, "out_distortion")?;
        let inst = &handle(instance, "instance")?.inner;
        let r = rule(str_arg(rule_name, "rule_name")?)?;
        let stats = population_stats(inst)?;
        let o = population_winner_from_stats(&stats, r, &TieBreakOrder::identity(inst.m()), tau)?;
        match o.decided() {
            Some(o) => {
                *slot = population_distortion(&stats, &o.lottery);
                Ok(())
            }
            None => Err(Failure(PldStatus::Ambiguous, format!("{r} outcome is ambiguous at tolerance {tau}"))),
        }
    })
}

/// Monte Carlo distortion over `trials` elections of `n` voters. The interval
/// outputs may be null; they receive NaN when `trials < 2`.
///
/// # Safety
/// `instance` must be a live handle, `rule_name` NUL-terminated, `out_mean`
/// valid and the interval outputs null or valid.
#[no_mangle]
pub unsafe extern "C" fn pld_empirical_distortion(
    instance: *const PldInstance,
    rule_name: *const c_char,
    n: usize,
    trials: usize,
    seed: u64,
    out_mean: *mut f64,
    out_ci_lo: *mut f64,
    out_ci_hi: *mut f64,
) -> PldStatus {
    guard(|| {
        let mean = out(out_mean, "out_mean")?;
        let inst = &handle(instance, "instance")?.inner;
        let r = rule(str_arg(rule_name, "rule_name")?)?;
        let e = empirical_distortion(inst, r, n, trials, seed, &TieBreakOrder::identity(inst.m()))?;
        *mean = e.empirical_mean;
        if let Some(lo) = out_ci_lo.as_mut() {
            *lo = e.ci_lo.unwrap_or(f64::NAN);
        }
        if let Some(hi) = out_ci_hi.as_mut() {
            *hi = e.ci_hi.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Closed-form bounds for a rule. A bound that is not stated is written as
/// NaN.
///
/// # Safety
/// `rule_name` must be NUL-terminated and the outputs valid.
#[no_mangle]
pub unsafe extern "C" fn pld_bounds(
    rule_name: *const c_char,
    beta: f64,
    m: usize,
    epsilon: f64,
    out_upper: *mut f64,
    out_lower: *mut f64,
    out_pclc: *mut f64,
) -> PldStatus {
    guard(|| {
        let (u, l, p) = (out(out_upper, "out_upper")?, out(out_lower, "out_lower")?, out(out_pclc, "out_pclc")?);
        let b = rule_bounds(rule(str_arg(rule_name, "rule_name")?)?, beta, m, epsilon)?;
        *u = b.upper_bound.value().unwrap_or(f64::NAN);
        *l = b.lower_bound.value().unwrap_or(f64::NAN);
        *p = b.pclc_bound;
        Ok(())
    })
}
