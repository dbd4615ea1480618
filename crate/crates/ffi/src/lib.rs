//! C ABI over `qauth-core`.
//!
//! Tagging unitaries live behind the opaque `QauthUnitary` handle. Every
//! fallible call returns a `QauthStatus`; on failure a description is
//! available from `qauth_last_error_message` on the same thread. Strings
//! handed out by the library are freed with `qauth_string_free`. Panics never
//! cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qauth_core::adversary::{best_message_attack, no_message_optimal, Priors, SearchConfig};
use qauth_core::conditions::{validate_unitary, ValidateOptions};
use qauth_core::matcore::{matrix_from_json, matrix_to_json, ComplexMatrix};
use qauth_core::{fixtures, Error, TaggingUnitary, Tolerances};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QauthStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotUnitary = 3,
    DimensionMismatch = 4,
    Parse = 5,
    Internal = 6,
}

/// Opaque handle to a validated 4×4 tagging unitary.
pub struct QauthUnitary {
    inner: TaggingUnitary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QauthStatus {
    match e {
        Error::NotUnitary { .. } => QauthStatus::NotUnitary,
        Error::DimensionMismatch { .. } => QauthStatus::DimensionMismatch,
        Error::Parse(_) => QauthStatus::Parse,
        Error::InvalidArgument(_) => QauthStatus::InvalidArgument,
        _ => QauthStatus::Internal,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), QauthStatus>) -> QauthStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QauthStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            QauthStatus::Internal
        }
    }
}

fn fail(e: Error) -> QauthStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> QauthStatus {
    set_error(&format!("{what} is null"));
    QauthStatus::NullPointer
}

unsafe fn handle<'a>(u: *const QauthUnitary) -> Result<&'a TaggingUnitary, QauthStatus> {
    // SAFETY: caller passes a handle obtained from this library or null.
    unsafe { u.as_ref() }
        .map(|h| &h.inner)
        .ok_or_else(|| null("unitary handle"))
}

fn boxed(u: TaggingUnitary) -> *mut QauthUnitary {
    Box::into_raw(Box::new(QauthUnitary { inner: u }))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no interior nul").into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qauth_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qauth_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses matrix JSON (`{"rows":4,"cols":4,"data":[[re,im],...]}`) and
/// checks unitarity to `tolerance` (≤ 0 selects the default).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qauth_unitary_from_json(
    json: *const c_char,
    tolerance: f64,
    out: *mut *mut QauthUnitary,
) -> QauthStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: checked non-null; caller guarantees NUL termination.
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|_| fail(Error::InvalidArgument("json is not UTF-8".into())))?;
        let m = matrix_from_json(text).map_err(fail)?;
        let u = load(m, tolerance).map_err(fail)?;
        // SAFETY: checked non-null.
        unsafe { *out = boxed(u) };
        Ok(())
    })
}

/// Builds a unitary from 16 row-major real and imaginary parts.
///
/// # Safety
/// `re` and `im` must each point to `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qauth_unitary_from_parts(
    re: *const f64,
    im: *const f64,
    len: usize,
    tolerance: f64,
    out: *mut *mut QauthUnitary,
) -> QauthStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("entry array"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if len != 16 {
            return Err(fail(Error::DimensionMismatch {
                expected: "16 entries".into(),
                actual: len.to_string(),
            }));
        }
        // SAFETY: caller guarantees `len` readable doubles in each array.
        let (re, im) = unsafe { (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len)) };
        let data = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let m = ComplexMatrix::from_vec(4, 4, data).map_err(fail)?;
        let u = load(m, tolerance).map_err(fail)?;
        // SAFETY: checked non-null.
        unsafe { *out = boxed(u) };
        Ok(())
    })
}

fn load(m: ComplexMatrix, tolerance: f64) -> qauth_core::Result<TaggingUnitary> {
    if m.rows() != 4 || m.cols() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4×4".into(),
            actual: format!("{}×{}", m.rows(), m.cols()),
        });
    }
    let tol = if tolerance > 0.0 {
        tolerance
    } else {
        Tolerances::default().unitarity
    };
    TaggingUnitary::with_tolerance(m, tol)
}

/// The built-in worked-example unitary. Never null.
#[no_mangle]
pub extern "C" fn qauth_unitary_worked_example() -> *mut QauthUnitary {
    boxed(fixtures::worked_example())
}

/// # Safety
/// `u` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qauth_unitary_free(u: *mut QauthUnitary) {
    if !u.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { Box::from_raw(u) });
    }
}

/// Canonical matrix JSON of `u`; free with `qauth_string_free`.
///
/// # Safety
/// `u` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qauth_unitary_to_json(u: *const QauthUnitary, out: *mut *mut c_char) -> QauthStatus {
    guard(|| {
        // SAFETY: see function contract.
        let u = unsafe { handle(u) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: checked non-null.
        unsafe { *out = into_c_string(matrix_to_json(u.matrix())) };
        Ok(())
    })
}

/// Optimal no-message forgery probability.
///
/// # Safety
/// `u` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qauth_no_message_optimal(u: *const QauthUnitary, out: *mut f64) -> QauthStatus {
    guard(|| {
        // SAFETY: see function contract.
        let u = unsafe { handle(u) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: checked non-null.
        unsafe { *out = no_message_optimal(u).probability };
        Ok(())
    })
}

/// Best message-substitution forgery probability found with `budget`
/// evaluations, equal priors.
///
/// # Safety
/// `u` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qauth_best_message_attack(
    u: *const QauthUnitary,
    budget: usize,
    seed: u64,
    out: *mut f64,
) -> QauthStatus {
    guard(|| {
        // SAFETY: see function contract.
        let u = unsafe { handle(u) }?;
        if out.is_null() {
            return Err(null("out"));
        }
        if budget == 0 {
            return Err(fail(Error::InvalidArgument("budget must be positive".into())));
        }
        let r = best_message_attack(u, Priors::default(), budget, seed, &SearchConfig::default());
        // SAFETY: checked non-null.
        unsafe { *out = r.probability };
        Ok(())
    })
}

/// Runs the security checklist. `secure` receives 1 or 0; if `report` is
/// non-null it receives the full JSON report (free with
/// `qauth_string_free`). `budget` = 0 skips the advisory attack search.
///
/// # Safety
/// `u` must be a valid handle, `secure` a valid pointer, `report` null or valid.
#[no_mangle]
pub unsafe extern "C" fn qauth_validate(
    u: *const QauthUnitary,
    budget: usize,
    seed: u64,
    secure: *mut i32,
    report: *mut *mut c_char,
) -> QauthStatus {
    guard(|| {
        // SAFETY: see function contract.
        let u = unsafe { handle(u) }?;
        if secure.is_null() {
            return Err(null("secure"));
        }
        let opts = ValidateOptions {
            budget,
            seed,
            ..ValidateOptions::default()
        };
        let r = validate_unitary(u, &opts);
        // SAFETY: checked non-null; `report` checked below.
        unsafe {
            *secure = i32::from(r.overall_secure);
            if !report.is_null() {
                let json = serde_json::to_string(&r).map_err(|e| fail(Error::Parse(e)))?;
                *report = into_c_string(json);
            }
        }
        Ok(())
    })
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qauth_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: ownership returns from the caller.
        drop(unsafe { CString::from_raw(s) });
    }
}
