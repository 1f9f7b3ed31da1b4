//! C ABI for `kbasis`.
//!
//! Objects cross the boundary as opaque handles created by `kb_*_new` or
//! `kb_run_trials` and released with the matching `kb_*_free`. Every
//! fallible call returns a [`KbStatus`] and writes its result through an
//! out pointer; on failure `kb_last_error_message` describes the error
//! for the calling thread. Panics are caught and reported as
//! `KB_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kbasis::analytics::{asympt_mean_missing, exact_mean_missing_k2};
use kbasis::experiments::{estimate_basis_prob, run_trials_with, Limits, TrialStats};
use kbasis::model::{limit_basis_prob, threshold_p, Mode, Model, Sampling};
use kbasis::Error;

pub const KB_MODE_TRUNCATED: u32 = 0;
pub const KB_MODE_MODULAR: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KbStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    /// Memory cap exceeded.
    Resource = 3,
    /// A Rust panic was caught at the boundary.
    Internal = 4,
}

/// Opaque model handle.
pub struct KbModel(Model);

/// Opaque result of a Monte Carlo run. The histogram is stored as a dense
/// list of `(value, count)` pairs in ascending value order.
pub struct KbTrialStats {
    stats: TrialStats,
    entries: Vec<(u64, u64)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(err: Error) -> KbStatus {
    let status = match err {
        Error::ResourceCap { .. } => KbStatus::Resource,
        _ => KbStatus::InvalidArgument,
    };
    set_error(err.to_string());
    status
}

fn null(what: &str) -> KbStatus {
    set_error(format!("null pointer: {what}"));
    KbStatus::NullPointer
}

/// Runs `f`, converting panics into `Internal`.
fn guard<F: FnOnce() -> KbStatus>(f: F) -> KbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("internal error: {msg}"));
            KbStatus::Internal
        }
    }
}

fn mode_of(mode: u32) -> Result<Mode, KbStatus> {
    match mode {
        KB_MODE_TRUNCATED => Ok(Mode::Truncated),
        KB_MODE_MODULAR => Ok(Mode::Modular),
        other => {
            set_error(format!("invalid mode: {other}"));
            Err(KbStatus::InvalidArgument)
        }
    }
}

/// Writes a successful `f64` result, or records the error.
unsafe fn put(out: *mut f64, value: kbasis::Result<f64>) -> KbStatus {
    match value {
        Ok(v) => {
            *out = v;
            KbStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a Bernoulli(`p`) model, or a fixed-size model with `fixed_size`
/// elements when `fixed_size` is nonzero.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_model_new(
    n: usize,
    k: usize,
    alpha: f64,
    p: f64,
    mode: u32,
    fixed_size: usize,
    out: *mut *mut KbModel,
) -> KbStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let mode = match mode_of(mode) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let sampling = match fixed_size {
            0 => Sampling::Bernoulli,
            m => Sampling::FixedSize(m),
        };
        match Model::new(n, k, alpha, p, mode, sampling) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(KbModel(m)));
                KbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `model` must be NULL or a handle from `kb_model_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kb_model_free(model: *mut KbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Target window `[lo, hi]` of the model.
///
/// # Safety
/// `model` must be a live handle; `lo` and `hi` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_model_window(model: *const KbModel, lo: *mut usize, hi: *mut usize) -> KbStatus {
    guard(|| {
        if model.is_null() || lo.is_null() || hi.is_null() {
            return null("model, lo or hi");
        }
        let (a, b) = (*model).0.window();
        *lo = a;
        *hi = b;
        KbStatus::Ok
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_threshold_p(n: usize, k: usize, alpha: f64, a_n: f64, mode: u32, out: *mut f64) -> KbStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match mode_of(mode) {
            Ok(m) => put(out, threshold_p(n, k, alpha, a_n, m)),
            Err(s) => s,
        }
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_limit_basis_prob(k: usize, alpha: f64, a: f64, mode: u32, out: *mut f64) -> KbStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match mode_of(mode) {
            Ok(m) => put(out, limit_basis_prob(k, alpha, a, m)),
            Err(s) => s,
        }
    })
}

/// Exact `E(X)` for 2-bases.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_exact_mean_missing_k2(n: usize, p: f64, alpha: f64, mode: u32, out: *mut f64) -> KbStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match mode_of(mode) {
            Ok(m) => put(out, exact_mean_missing_k2(n, p, alpha, m)),
            Err(s) => s,
        }
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_asympt_mean_missing(
    n: usize,
    p: f64,
    alpha: f64,
    k: usize,
    mode: u32,
    out: *mut f64,
) -> KbStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match mode_of(mode) {
            Ok(m) => put(out, asympt_mean_missing(n, p, alpha, k, m)),
            Err(s) => s,
        }
    })
}

/// Runs `trials` trials under `seed`. `memory_cap` bounds the sumset
/// bitmap in bytes; 0 selects the library default.
///
/// # Safety
/// `model` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_run_trials(
    model: *const KbModel,
    trials: u64,
    seed: u64,
    memory_cap: u64,
    out: *mut *mut KbTrialStats,
) -> KbStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return null("model or out");
        }
        let limits = match memory_cap {
            0 => Limits::default(),
            cap => Limits { memory_cap: cap },
        };
        match run_trials_with(&(*model).0, trials, seed, &limits) {
            Ok(stats) => {
                let entries = stats.x_histogram.iter().map(|(&v, &c)| (v, c)).collect();
                *out = Box::into_raw(Box::new(KbTrialStats { stats, entries }));
                KbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `stats` must be NULL or a handle from `kb_run_trials` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kb_stats_free(stats: *mut KbTrialStats) {
    if !stats.is_null() {
        drop(Box::from_raw(stats));
    }
}

/// Number of trials; 0 for a NULL handle.
///
/// # Safety
/// `stats` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kb_stats_trials(stats: *const KbTrialStats) -> u64 {
    stats.as_ref().map_or(0, |s| s.stats.trials)
}

/// Trials in which the set was a basis; 0 for a NULL handle.
///
/// # Safety
/// `stats` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kb_stats_basis_successes(stats: *const KbTrialStats) -> u64 {
    stats.as_ref().map_or(0, |s| s.stats.basis_successes)
}

/// Mean of X; NaN for a NULL handle.
///
/// # Safety
/// `stats` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kb_stats_mean_x(stats: *const KbTrialStats) -> f64 {
    stats.as_ref().map_or(f64::NAN, |s| s.stats.mean_x)
}

/// Number of distinct values of X observed.
///
/// # Safety
/// `stats` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kb_stats_histogram_len(stats: *const KbTrialStats) -> usize {
    stats.as_ref().map_or(0, |s| s.entries.len())
}

/// The `index`-th histogram entry in ascending value order.
///
/// # Safety
/// `stats` must be a live handle; `value` and `count` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_stats_histogram_entry(
    stats: *const KbTrialStats,
    index: usize,
    value: *mut u64,
    count: *mut u64,
) -> KbStatus {
    guard(|| {
        let Some(s) = stats.as_ref() else {
            return null("stats");
        };
        if value.is_null() || count.is_null() {
            return null("value or count");
        }
        match s.entries.get(index) {
            Some(&(v, c)) => {
                *value = v;
                *count = c;
                KbStatus::Ok
            }
            None => {
                set_error(format!("histogram index {index} out of range ({} entries)", s.entries.len()));
                KbStatus::InvalidArgument
            }
        }
    })
}

/// Basis-probability estimate with its 95% Wilson interval.
///
/// # Safety
/// `stats` must be a live handle; the out pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kb_stats_basis_estimate(
    stats: *const KbTrialStats,
    p_hat: *mut f64,
    ci_lo: *mut f64,
    ci_hi: *mut f64,
) -> KbStatus {
    guard(|| {
        let Some(s) = stats.as_ref() else {
            return null("stats");
        };
        if p_hat.is_null() || ci_lo.is_null() || ci_hi.is_null() {
            return null("p_hat, ci_lo or ci_hi");
        }
        let e = estimate_basis_prob(&s.stats);
        *p_hat = e.p_hat;
        *ci_lo = e.ci_lo;
        *ci_hi = e.ci_hi;
        KbStatus::Ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn last_error() -> String {
        unsafe { CStr::from_ptr(kb_last_error_message()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn invalid_mode_is_rejected() {
        let mut out = 0.0;
        let s = unsafe { kb_threshold_p(1000, 2, 0.5, 0.0, 7, &mut out) };
        assert_eq!(s, KbStatus::InvalidArgument);
        assert!(last_error().contains("mode"));
    }

    #[test]
    fn panics_become_internal() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, KbStatus::Internal);
        assert!(last_error().contains("boom"));
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(kb_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
