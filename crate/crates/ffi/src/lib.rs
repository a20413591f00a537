//! C ABI over the `cantor-bounds` engines.
//!
//! Results live behind opaque handles that the caller releases with the
//! matching `*_free` function. Every fallible call returns a [`CbStatus`];
//! the message of the most recent failure on the calling thread is available
//! from [`cb_last_error`]. Strings returned by the library are released with
//! [`cb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cantor_bounds::bounds::{dimension, naive_upper, BoundResult};
use cantor_bounds::lower::{refine_lower_bound, replay_d3, LowerBoundChain, LowerOptions, Seed};
use cantor_bounds::upper::{upper_bound, UpperOptions};
use cantor_bounds::Error;

/// Outcome of a library call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbStatus {
    Ok = 0,
    InvalidArgument = 1,
    BudgetExceeded = 2,
    ReplayFailed = 3,
    EmptyCache = 4,
    NullPointer = 5,
    Io = 6,
    Internal = 7,
}

/// Seed diameter for the lower-bound refinement.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbSeed {
    FiveNinths = 0,
    OneThird = 1,
}

/// A certified upper or lower bound.
pub struct CbBound {
    inner: BoundResult,
}

/// A lower-bound refinement chain.
pub struct CbChain {
    inner: LowerBoundChain,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CbStatus {
    match e {
        Error::BudgetExceeded { .. } => CbStatus::BudgetExceeded,
        Error::ReplayFailed { .. } => CbStatus::ReplayFailed,
        Error::EmptyCache(_) => CbStatus::EmptyCache,
        Error::Io(_) => CbStatus::Io,
        Error::Json(_) => CbStatus::Internal,
        _ => CbStatus::InvalidArgument,
    }
}

fn fail(e: Error) -> CbStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

/// Runs `f`, mapping panics to [`CbStatus::Internal`].
fn guard(f: impl FnOnce() -> CbStatus) -> CbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            CbStatus::Internal
        }
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `d log_3 2`, nearest double; NaN outside the supported range.
#[no_mangle]
pub extern "C" fn cb_dimension(dim: u32) -> f64 {
    if dim == 0 || dim > cantor_bounds::lattice::MAX_DIM {
        return f64::NAN;
    }
    dimension(dim)
}

/// Cover-by-cube bound `d^{s_d / 2}`, rounded up.
///
/// # Safety
/// `out` must be null or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn cb_naive_upper(dim: u32, out: *mut f64) -> CbStatus {
    if out.is_null() {
        return CbStatus::NullPointer;
    }
    if dim == 0 || dim > cantor_bounds::lattice::MAX_DIM {
        return fail(Error::InvalidDimension(dim));
    }
    guard(|| {
        *out = naive_upper(dim);
        CbStatus::Ok
    })
}

/// Upper bound at depth `depth`; `budget` caps the number of lattice points
/// (0 selects the default).
///
/// # Safety
/// `out` must be null or valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn cb_upper_bound(dim: u32, depth: u32, budget: u64, out: *mut *mut CbBound) -> CbStatus {
    if out.is_null() {
        return CbStatus::NullPointer;
    }
    *out = ptr::null_mut();
    guard(|| {
        let mut opts = UpperOptions::default();
        if budget > 0 {
            opts.budget = budget;
        }
        match upper_bound(dim, depth, &opts) {
            Ok(b) => {
                *out = Box::into_raw(Box::new(CbBound { inner: b }));
                CbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `bound` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cb_bound_value(bound: *const CbBound) -> f64 {
    bound.as_ref().map_or(f64::NAN, |b| b.inner.value)
}

/// # Safety
/// `bound` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cb_bound_dim(bound: *const CbBound) -> u32 {
    bound.as_ref().map_or(0, |b| b.inner.dim)
}

/// # Safety
/// `bound` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cb_bound_depth(bound: *const CbBound) -> u32 {
    bound.as_ref().map_or(0, |b| b.inner.depth)
}

/// 1 for an upper bound, 0 for a lower bound, -1 for null.
///
/// # Safety
/// `bound` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cb_bound_is_upper(bound: *const CbBound) -> i32 {
    match bound.as_ref() {
        None => -1,
        Some(b) => i32::from(b.inner.direction == cantor_bounds::bounds::BoundDirection::Upper),
    }
}

/// The bound as JSON; free with [`cb_string_free`]. Null on failure.
///
/// # Safety
/// `bound` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cb_bound_to_json(bound: *const CbBound) -> *mut c_char {
    match bound.as_ref() {
        None => ptr::null_mut(),
        Some(b) => serde_json::to_string(&b.inner).map(into_c_string).unwrap_or(ptr::null_mut()),
    }
}

/// # Safety
/// `bound` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_bound_free(bound: *mut CbBound) {
    if !bound.is_null() {
        drop(Box::from_raw(bound));
    }
}

/// Lower-bound refinement against the upper bound `upper`.
///
/// # Safety
/// `upper` must be a live bound handle; `out` must be null or valid for a
/// write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn cb_lower_bound(
    dim: u32,
    depth: u32,
    upper: *const CbBound,
    seed: CbSeed,
    out: *mut *mut CbChain,
) -> CbStatus {
    if out.is_null() || upper.is_null() {
        return CbStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let upper = &(*upper).inner;
    guard(|| {
        let seed = match seed {
            CbSeed::FiveNinths => Seed::FiveNinths,
            CbSeed::OneThird => Seed::OneThird,
        };
        let opts = LowerOptions { seed, ..Default::default() };
        match refine_lower_bound(dim, depth, upper, &opts) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(CbChain { inner: c }));
                CbStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Replays the published three-dimensional level-2 chain. On a failed check
/// the status is [`CbStatus::ReplayFailed`] and `out` still receives the
/// chain of the steps verified before it.
///
/// # Safety
/// As for [`cb_lower_bound`].
#[no_mangle]
pub unsafe extern "C" fn cb_replay_d3(upper: *const CbBound, out: *mut *mut CbChain) -> CbStatus {
    if out.is_null() || upper.is_null() {
        return CbStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let upper = &(*upper).inner;
    guard(|| match replay_d3(upper) {
        Ok(report) => {
            *out = Box::into_raw(Box::new(CbChain { inner: report.chain }));
            match report.failure {
                None => CbStatus::Ok,
                Some(f) => fail(Error::ReplayFailed { step: f.step, label: f.label, reason: f.reason }),
            }
        }
        Err(e) => fail(e),
    })
}

/// # Safety
/// `chain` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cb_chain_final_value(chain: *const CbChain) -> f64 {
    chain.as_ref().map_or(f64::NAN, |c| c.inner.final_value)
}

/// Final squared diameter bound as `numerator / denominator`, when both fit.
///
/// # Safety
/// `chain` must be a live handle; `num` and `den` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cb_chain_final_diameter_sq(chain: *const CbChain, num: *mut u64, den: *mut u64) -> CbStatus {
    if chain.is_null() || num.is_null() || den.is_null() {
        return CbStatus::NullPointer;
    }
    use num_traits::ToPrimitive;
    let r = (*chain).inner.final_sq.value();
    match (r.numer().to_u64(), r.denom().to_u64()) {
        (Some(n), Some(d)) => {
            *num = n;
            *den = d;
            CbStatus::Ok
        }
        _ => fail(Error::InvalidArgument("diameter does not fit in 64 bits".into())),
    }
}

/// # Safety
/// `chain` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cb_chain_step_count(chain: *const CbChain) -> usize {
    chain.as_ref().map_or(0, |c| c.inner.steps.len())
}

/// The chain's lower bound as a new bound handle.
///
/// # Safety
/// `chain` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cb_chain_bound(chain: *const CbChain) -> *mut CbBound {
    match chain.as_ref() {
        None => ptr::null_mut(),
        Some(c) => Box::into_raw(Box::new(CbBound { inner: c.inner.bound() })),
    }
}

/// The chain as JSON; free with [`cb_string_free`].
///
/// # Safety
/// `chain` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn cb_chain_to_json(chain: *const CbChain) -> *mut c_char {
    match chain.as_ref() {
        None => ptr::null_mut(),
        Some(c) => serde_json::to_string(&c.inner).map(into_c_string).unwrap_or(ptr::null_mut()),
    }
}

/// # Safety
/// `chain` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_chain_free(chain: *mut CbChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Copies the last error message, for callers that prefer owned strings.
pub fn last_error_string() -> Option<String> {
    let p = cb_last_error();
    if p.is_null() {
        None
    } else {
        Some(unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
    }
}
