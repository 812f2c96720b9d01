//! C ABI for the `sumsets` library.
//!
//! Sets are opaque [`SumsetsSet`] handles created by [`sumsets_set_parse`] or
//! [`sumsets_set_builtin`] and released with [`sumsets_set_free`]. Every
//! fallible call returns a [`SumsetsStatus`]; on failure the message is
//! available from [`sumsets_last_error`] on the same thread. Strings handed
//! out by the library are released with [`sumsets_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sumsets::constructions::{self, VerifyOptions};
use sumsets::density::{self, Schedule};
use sumsets::search::{self, Mode, SearchConfig, SearchReport};
use sumsets::{Error, Limits, SetExpr};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumsetsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    AmbiguousBoundary = 4,
    ResourceLimit = 5,
    UnknownSchedule = 6,
    UnknownKey = 7,
    DisjointnessViolated = 8,
    HorizonExceeded = 9,
    SampleExhausted = 10,
    MaterializationFailure = 11,
    InvalidParameter = 12,
    BufferTooSmall = 13,
    Panic = 14,
}

impl From<&Error> for SumsetsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } => SumsetsStatus::Parse,
            Error::AmbiguousBoundary { .. } => SumsetsStatus::AmbiguousBoundary,
            Error::ResourceLimit { .. } => SumsetsStatus::ResourceLimit,
            Error::UnknownSchedule(_) => SumsetsStatus::UnknownSchedule,
            Error::UnknownKey(_) => SumsetsStatus::UnknownKey,
            Error::DisjointnessViolated { .. } => SumsetsStatus::DisjointnessViolated,
            Error::HorizonExceeded { .. } => SumsetsStatus::HorizonExceeded,
            Error::SampleExhausted(_) => SumsetsStatus::SampleExhausted,
            Error::MaterializationFailure { .. } => SumsetsStatus::MaterializationFailure,
            Error::InvalidParameter(_) => SumsetsStatus::InvalidParameter,
        }
    }
}

/// Opaque set expression.
pub struct SumsetsSet {
    expr: SetExpr,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(SumsetsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SumsetsStatus::from(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SumsetsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SumsetsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SumsetsStatus::Panic
        }
    }
}

fn null() -> Failure {
    Failure(SumsetsStatus::NullPointer, "null pointer argument".into())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SumsetsStatus::InvalidUtf8, "argument is not UTF-8".into()))
}

unsafe fn handle<'a>(p: *const SumsetsSet) -> Result<&'a SetExpr, Failure> {
    p.as_ref().map(|h| &h.expr).ok_or_else(null)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(SumsetsStatus::InvalidParameter, "string contains nul".into()))?;
    write_out(out, c.into_raw())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string(v).map_err(|e| Failure(SumsetsStatus::InvalidParameter, e.to_string()))
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sumsets_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sumsets_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses DSL text into a new handle.
///
/// # Safety
/// `dsl` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sumsets_set_parse(dsl: *const c_char, out: *mut *mut SumsetsSet) -> SumsetsStatus {
    guard(|| {
        let expr = sumsets::parse(text(dsl)?)?;
        write_out(out, Box::into_raw(Box::new(SumsetsSet { expr })))
    })
}

/// Built-in set by key, e.g. `P41_A`. Colorings are rejected.
///
/// # Safety
/// `key` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sumsets_set_builtin(key: *const c_char, out: *mut *mut SumsetsSet) -> SumsetsStatus {
    guard(|| {
        let nc = constructions::get(text(key)?)?;
        let expr = nc.set()?.clone();
        write_out(out, Box::into_raw(Box::new(SumsetsSet { expr })))
    })
}

/// Releases a handle; NULL is ignored.
///
/// # Safety
/// `set` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sumsets_set_free(set: *mut SumsetsSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sumsets_set_member(set: *const SumsetsSet, n: u64, out: *mut bool) -> SumsetsStatus {
    guard(|| {
        let member = handle(set)?.member(n)?;
        write_out(out, member)
    })
}

/// `|A ∩ [1, horizon]|`.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sumsets_set_count(set: *const SumsetsSet, horizon: u64, out: *mut u64) -> SumsetsStatus {
    guard(|| {
        let count = handle(set)?.count_with(horizon, &Limits::from_env())?;
        write_out(out, count)
    })
}

/// Packs membership on `[1, horizon]` into `buf`: element `n` is bit
/// `(n - 1) % 8` of byte `(n - 1) / 8`. `len` must be at least
/// `ceil(horizon / 8)`.
///
/// # Safety
/// `set` must be a live handle and `buf` valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sumsets_set_bitmap(
    set: *const SumsetsSet,
    horizon: u64,
    buf: *mut u8,
    len: usize,
) -> SumsetsStatus {
    guard(|| {
        let expr = handle(set)?;
        if buf.is_null() {
            return Err(null());
        }
        let need = horizon.div_ceil(8);
        if (len as u64) < need {
            return Err(Failure(
                SumsetsStatus::BufferTooSmall,
                format!("bitmap needs {need} bytes, got {len}"),
            ));
        }
        let bm = expr.bitmap_with(horizon, &Limits::from_env())?;
        let bytes = std::slice::from_raw_parts_mut(buf, need as usize);
        bytes.fill(0);
        for n in bm.ones() {
            let i = (n - 1) as usize;
            bytes[i / 8] |= 1 << (i % 8);
        }
        Ok(())
    })
}

/// Canonical DSL text of the handle.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer; release the
/// result with [`sumsets_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sumsets_set_render(set: *const SumsetsSet, out: *mut *mut c_char) -> SumsetsStatus {
    guard(|| write_string(out, handle(set)?.to_dsl()))
}

/// Density report along a schedule such as `powers4(8)`, as JSON.
///
/// # Safety
/// `set` must be a live handle, `schedule` a NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sumsets_density_json(
    set: *const SumsetsSet,
    schedule: *const c_char,
    out: *mut *mut c_char,
) -> SumsetsStatus {
    guard(|| {
        let expr = handle(set)?;
        let sched = Schedule::parse(text(schedule)?)?;
        let rep = density::density_report(expr, &sched, None, &Limits::from_env())?;
        write_string(out, to_json(&rep)?)
    })
}

/// Maximum witness search, as JSON. `exact` selects branch and bound
/// over the greedy heuristic; `node_budget` of 0 means the default. No
/// wall-clock budget is applied.
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sumsets_search_json(
    set: *const SumsetsSet,
    t: u64,
    horizon: u64,
    exact: bool,
    node_budget: u64,
    out: *mut *mut c_char,
) -> SumsetsStatus {
    guard(|| {
        let expr = handle(set)?;
        let mode = if exact { Mode::Exact } else { Mode::Greedy };
        let mut cfg = SearchConfig::new(mode, t, horizon);
        cfg.time_budget = None;
        if node_budget > 0 {
            cfg.node_budget = node_budget;
        }
        let outcome = search::max_witness(expr, &cfg, &Limits::from_env())?;
        write_string(out, to_json(&SearchReport::new(expr, &cfg, outcome))?)
    })
}

/// Runs the claims of a built-in up to `horizon`, as JSON.
///
/// # Safety
/// `key` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sumsets_verify_json(key: *const c_char, horizon: u64, out: *mut *mut c_char) -> SumsetsStatus {
    guard(|| {
        let mut opts = VerifyOptions::new(horizon);
        opts.time_budget = None;
        let rep = constructions::verify(text(key)?, &opts, &Limits::from_env())?;
        write_string(out, to_json(&rep)?)
    })
}

/// Releases a string returned by this library; NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sumsets_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
