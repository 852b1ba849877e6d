//! C ABI for the `ccit` crate.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_run` functions and released by the matching `*_free`. Every fallible
//! function returns a [`CcitStatus`]; on failure,
//! [`ccit_last_error_message`] describes the most recent error on the calling
//! thread. Panics are caught at the boundary and reported as
//! [`CcitStatus::Internal`].
//!
//! ```c
//! CcitDataset *ds = NULL;
//! if (ccit_dataset_new(values, rows, 1, 1, 2, &ds) != CCIT_STATUS_OK) {
//!     fprintf(stderr, "%s\n", ccit_last_error_message());
//! }
//! CcitTestOptions opts = ccit_test_options_default();
//! opts.seed = 7;
//! CcitResult *res = NULL;
//! ccit_test_run(ds, &opts, &res);
//! double score = ccit_result_score(res);
//! ccit_result_free(res);
//! ccit_dataset_free(ds);
//! ```

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ccit::ci_test::{ccit_bootstrap, default_tau, n_test_for, AggregateResult, Decision, Variant, DEFAULT_BOOTSTRAPS};
use ccit::classifier::GbtParams;
use ccit::data::{Dataset, DimSpec};
use ccit::eval::roc_auc;
use ccit::Error;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DataError = 3,
    Internal = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcitVariant {
    V1 = 1,
    V2 = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcitDecision {
    Ci = 0,
    NotCi = 1,
}

/// Opaque dataset handle.
pub struct CcitDataset {
    inner: Dataset,
}

/// Opaque result handle.
pub struct CcitResult {
    inner: AggregateResult,
}

/// Options of [`ccit_test_run`]. Start from [`ccit_test_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcitTestOptions {
    /// Bootstrap runs to average.
    pub bootstraps: usize,
    /// Decision threshold; any negative value selects `1/sqrt(n_test)`.
    pub tau: f64,
    pub variant: CcitVariant,
    pub seed: u64,
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    pub l2_reg: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CcitStatus {
    match e {
        Error::InvalidParam(_) | Error::DimMismatch(_) | Error::ColSpec(_) => CcitStatus::InvalidArgument,
        _ => CcitStatus::DataError,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (CcitStatus, String)>) -> CcitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CcitStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal error: panic inside ccit");
            CcitStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (CcitStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (CcitStatus, String) {
    (CcitStatus::NullPointer, format!("{name} is null"))
}

/// Message of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn ccit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ccit_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Copies `rows * (dx + dy + dz)` row-major values into a new dataset.
/// Columns of each row are ordered X block, Y block, Z block.
///
/// # Safety
/// `values` must point to that many readable doubles (it may be null when
/// `rows` is 0) and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ccit_dataset_new(
    values: *const f64,
    rows: usize,
    dx: usize,
    dy: usize,
    dz: usize,
    out: *mut *mut CcitDataset,
) -> CcitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let dims = DimSpec::new(dx, dy, dz).map_err(lib_err)?;
        let len = rows
            .checked_mul(dims.width())
            .ok_or((CcitStatus::InvalidArgument, "dataset size overflows".to_string()))?;
        let data = if len == 0 {
            Vec::new()
        } else if values.is_null() {
            return Err(null("values"));
        } else {
            std::slice::from_raw_parts(values, len).to_vec()
        };
        let inner = Dataset::new(data, dims).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CcitDataset { inner }));
        Ok(())
    })
}

/// Number of rows, or 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle from [`ccit_dataset_new`].
#[no_mangle]
pub unsafe extern "C" fn ccit_dataset_rows(dataset: *const CcitDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.inner.len())
}

/// Releases a dataset. Null is ignored.
///
/// # Safety
/// `dataset` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccit_dataset_free(dataset: *mut CcitDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Defaults: 50 bootstraps, automatic threshold, variant 2, seed 0 and the
/// default boosted-trees settings.
#[no_mangle]
pub extern "C" fn ccit_test_options_default() -> CcitTestOptions {
    let p = GbtParams::default();
    CcitTestOptions {
        bootstraps: DEFAULT_BOOTSTRAPS,
        tau: -1.0,
        variant: CcitVariant::V2,
        seed: 0,
        rounds: p.rounds,
        max_depth: p.max_depth,
        learning_rate: p.learning_rate,
        min_leaf: p.min_leaf,
        l2_reg: p.l2_reg,
    }
}

/// Runs the bootstrap-aggregated test on `dataset`. `options` may be null
/// for the defaults.
///
/// # Safety
/// `dataset` must be a live handle, `options` null or valid, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ccit_test_run(
    dataset: *const CcitDataset,
    options: *const CcitTestOptions,
    out: *mut *mut CcitResult,
) -> CcitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let ds = &dataset.as_ref().ok_or_else(|| null("dataset"))?.inner;
        let opts = options.as_ref().copied().unwrap_or_else(|| ccit_test_options_default());
        let params = GbtParams {
            rounds: opts.rounds,
            max_depth: opts.max_depth,
            learning_rate: opts.learning_rate,
            min_leaf: opts.min_leaf,
            l2_reg: opts.l2_reg,
        };
        params.validate().map_err(lib_err)?;
        let tau = if opts.tau.is_nan() {
            return Err((CcitStatus::InvalidArgument, "tau is NaN".to_string()));
        } else if opts.tau < 0.0 {
            default_tau(n_test_for(ds.len())).map_err(lib_err)?
        } else {
            opts.tau
        };
        let variant = match opts.variant {
            CcitVariant::V1 => Variant::V1,
            CcitVariant::V2 => Variant::V2,
        };
        let inner = ccit_bootstrap(ds, opts.bootstraps, tau, variant, &params, opts.seed).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(CcitResult { inner }));
        Ok(())
    })
}

/// Mean statistic used as the dependence score; NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccit_result_score(result: *const CcitResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.score)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccit_result_mean_statistic(result: *const CcitResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.mean_statistic)
}

/// Threshold the decision used; NaN for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccit_result_tau(result: *const CcitResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.tau)
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccit_result_bootstraps(result: *const CcitResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.bootstraps())
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccit_result_n_test(result: *const CcitResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.n_test)
}

/// Verdict of the aggregate test. A null handle reads as CI.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccit_result_decision(result: *const CcitResult) -> CcitDecision {
    match result.as_ref().map(|r| r.inner.decision) {
        Some(Decision::NotCi) => CcitDecision::NotCi,
        _ => CcitDecision::Ci,
    }
}

/// Writes the result as JSON into a new string; release it with
/// [`ccit_string_free`].
///
/// # Safety
/// `result` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ccit_result_to_json(result: *const CcitResult, out: *mut *mut c_char) -> CcitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let json = r.inner.to_json().map_err(lib_err)?;
        let c = CString::new(json).map_err(|e| (CcitStatus::Internal, e.to_string()))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not freed before.
#[no_mangle]
pub unsafe extern "C" fn ccit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `result` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ccit_result_free(result: *mut CcitResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// ROC AUC of `scores` against 0/1 `labels`, ties credited one half.
///
/// # Safety
/// `scores` and `labels` must each point to `n` readable elements and `out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccit_roc_auc(scores: *const f64, labels: *const u8, n: usize, out: *mut f64) -> CcitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if n > 0 && (scores.is_null() || labels.is_null()) {
            return Err(null("scores or labels"));
        }
        let (s, l): (&[f64], &[u8]) = if n == 0 {
            (&[], &[])
        } else {
            (std::slice::from_raw_parts(scores, n), std::slice::from_raw_parts(labels, n))
        };
        *out = roc_auc(s, l).map_err(lib_err)?;
        Ok(())
    })
}

/// `1/sqrt(n_test)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ccit_default_tau(n_test: usize, out: *mut f64) -> CcitStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = default_tau(n_test).map_err(lib_err)?;
        Ok(())
    })
}
