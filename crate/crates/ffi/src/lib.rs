//! C ABI over the lifting engine.
//!
//! Problems, φ and constructed maps live behind opaque handles. Structured
//! results cross the boundary as JSON strings. Every fallible call returns an
//! [`SlStatus`]; on failure the message is available from
//! [`sl_last_error`] until the next failing call on the same thread. Strings
//! returned through out-parameters are owned by the caller and must be
//! released with [`sl_string_free`]; handles with their own `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use spectral_lift::discmap::DiscMap;
use spectral_lift::linalg::C64;
use spectral_lift::phi::Phi;
use spectral_lift::phi_builder::build_phi_with;
use spectral_lift::problem::{Problem, ProblemFile};
use spectral_lift::verifier::VerifyConfig;
use spectral_lift::LiftError;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    /// The supplied φ violates at least one interpolation condition.
    ConditionsFailed = 4,
    /// A quotient in the construction is not holomorphic; the message names
    /// the obstructing condition.
    NotDivisible = 5,
    /// Any other construction failure (singular data, unsupported base, …).
    ConstructionFailed = 6,
    /// The certificate of a constructed map did not pass.
    VerificationFailed = 7,
    /// No feasible φ was found inside the domain.
    PhiNotFound = 8,
    /// A panic was caught at the boundary.
    Internal = 9,
}

/// Parsed problem (opaque).
pub struct SlProblem {
    file: ProblemFile,
    problem: Problem,
}

/// Polynomial φ (opaque).
pub struct SlPhi(Phi);

/// Constructed lift ψ (opaque).
pub struct SlMap(DiscMap);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &LiftError) -> SlStatus {
    match e {
        LiftError::InvalidInput(_) | LiftError::DimensionMismatch { .. } => SlStatus::InvalidInput,
        LiftError::ConditionsFailed(_) => SlStatus::ConditionsFailed,
        LiftError::NotDivisible { .. } => SlStatus::NotDivisible,
        LiftError::RetriesExhausted { .. } | LiftError::Infeasible { .. } => SlStatus::PhiNotFound,
        _ => SlStatus::ConstructionFailed,
    }
}

struct Fail(SlStatus, String);

impl From<LiftError> for Fail {
    fn from(e: LiftError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `body`, recording the message of any failure or panic.
fn guard(body: impl FnOnce() -> Result<SlStatus, Fail>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            SlStatus::Internal
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(SlStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(SlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(SlStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn put<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(SlStatus::NullPointer, format!("{what} is null")));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_json(out: *mut *mut c_char, v: &impl serde::Serialize) -> Result<(), Fail> {
    if out.is_null() {
        return Ok(());
    }
    let s = serde_json::to_string(v).map_err(|e| Fail(SlStatus::Internal, e.to_string()))?;
    *out = CString::new(s).expect("JSON has no nul bytes").into_raw();
    Ok(())
}

fn verify_config(tol: f64) -> Result<VerifyConfig, Fail> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Fail(SlStatus::InvalidInput, "tol: must be positive".into()));
    }
    Ok(VerifyConfig {
        tol,
        ..VerifyConfig::default()
    })
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a problem file (JSON).
///
/// # Safety
/// `json` must be a nul-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_problem_from_json(json: *const c_char, out: *mut *mut SlProblem) -> SlStatus {
    guard(|| {
        let file = ProblemFile::from_json(text(json, "json")?)?;
        let problem = file.problem()?;
        put(out, SlProblem { file, problem }, "out")?;
        Ok(SlStatus::Ok)
    })
}

/// # Safety
/// `p` must come from [`sl_problem_from_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sl_problem_free(p: *mut SlProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dimension `n` of the problem, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_problem_n(p: *const SlProblem) -> usize {
    p.as_ref().map_or(0, |p| p.problem.n())
}

/// Case tag of the problem as an owned string.
///
/// # Safety
/// `p` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_problem_case(p: *const SlProblem, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        let p = borrow(p, "problem")?;
        if out.is_null() {
            return Err(Fail(SlStatus::NullPointer, "out is null".into()));
        }
        *out = CString::new(p.problem.case_tag()).expect("tags have no nul bytes").into_raw();
        Ok(SlStatus::Ok)
    })
}

/// The φ embedded in the problem file, if any.
///
/// # Safety
/// `p` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_problem_phi(p: *const SlProblem, out: *mut *mut SlPhi) -> SlStatus {
    guard(|| {
        let p = borrow(p, "problem")?;
        let phi = p
            .file
            .phi
            .clone()
            .ok_or_else(|| Fail(SlStatus::InvalidInput, "phi: not present in the problem file".into()))?;
        put(out, SlPhi(phi), "out")?;
        Ok(SlStatus::Ok)
    })
}

/// Parses φ from `{"components": [[re, im] arrays]}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_phi_from_json(json: *const c_char, out: *mut *mut SlPhi) -> SlStatus {
    guard(|| {
        let phi: Phi = serde_json::from_str(text(json, "json")?)
            .map_err(|e| Fail(SlStatus::InvalidInput, format!("phi: {e}")))?;
        put(out, SlPhi(phi), "out")?;
        Ok(SlStatus::Ok)
    })
}

/// Builds a feasible φ. A negative `degree` selects the default.
///
/// # Safety
/// `p` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_phi_build(p: *const SlProblem, degree: i64, seed: u64, out: *mut *mut SlPhi) -> SlStatus {
    guard(|| {
        let p = borrow(p, "problem")?;
        let degree = usize::try_from(degree).ok();
        let phi = build_phi_with(&p.problem, degree, seed, &VerifyConfig::default())?;
        put(out, SlPhi(phi), "out")?;
        Ok(SlStatus::Ok)
    })
}

/// JSON encoding of φ.
///
/// # Safety
/// `phi` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_phi_to_json(phi: *const SlPhi, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        let phi = borrow(phi, "phi")?;
        if out.is_null() {
            return Err(Fail(SlStatus::NullPointer, "out is null".into()));
        }
        put_json(out, &phi.0)?;
        Ok(SlStatus::Ok)
    })
}

/// # Safety
/// `phi` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_phi_free(phi: *mut SlPhi) {
    if !phi.is_null() {
        drop(Box::from_raw(phi));
    }
}

/// Evaluates the interpolation conditions. Returns `Ok` when all pass and
/// `ConditionsFailed` otherwise; the report is written to `report_json` when
/// that pointer is non-null.
///
/// # Safety
/// Handles must be live; `report_json` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sl_check(
    p: *const SlProblem,
    phi: *const SlPhi,
    tol: f64,
    report_json: *mut *mut c_char,
) -> SlStatus {
    guard(|| {
        let (p, phi) = (borrow(p, "problem")?, borrow(phi, "phi")?);
        verify_config(tol)?;
        let report = p.problem.check(&phi.0, tol)?;
        put_json(report_json, &report)?;
        if report.pass {
            Ok(SlStatus::Ok)
        } else {
            let bad: Vec<&str> = report.failed().map(|c| c.label.as_str()).collect();
            Err(Fail(SlStatus::ConditionsFailed, format!("conditions failed: {}", bad.join(", "))))
        }
    })
}

/// Constructs the lift of φ.
///
/// # Safety
/// Handles must be live; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_lift(p: *const SlProblem, phi: *const SlPhi, tol: f64, out: *mut *mut SlMap) -> SlStatus {
    guard(|| {
        let (p, phi) = (borrow(p, "problem")?, borrow(phi, "phi")?);
        verify_config(tol)?;
        let map = p.problem.lift(&phi.0, tol)?;
        put(out, SlMap(map), "out")?;
        Ok(SlStatus::Ok)
    })
}

/// Certifies a constructed map on the default grid. Returns `Ok` when the
/// certificate passes and `VerificationFailed` otherwise; the certificate is
/// written to `cert_json` when that pointer is non-null.
///
/// # Safety
/// Handles must be live; `cert_json` null or valid.
#[no_mangle]
pub unsafe extern "C" fn sl_verify(
    p: *const SlProblem,
    map: *const SlMap,
    phi: *const SlPhi,
    tol: f64,
    cert_json: *mut *mut c_char,
) -> SlStatus {
    guard(|| {
        let (p, map, phi) = (borrow(p, "problem")?, borrow(map, "map")?, borrow(phi, "phi")?);
        let cert = p.problem.verify(&map.0, &phi.0, &verify_config(tol)?);
        put_json(cert_json, &cert)?;
        if cert.pass {
            Ok(SlStatus::Ok)
        } else {
            let bad: Vec<&str> = cert.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            Err(Fail(SlStatus::VerificationFailed, format!("verification failed: {}", bad.join(", "))))
        }
    })
}

/// Writes `ψ(re + i·im)` row-major as interleaved `(re, im)` pairs into
/// `out`, which must hold `2·n²` doubles; `len` is its length.
///
/// # Safety
/// `map` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sl_map_eval(map: *const SlMap, re: f64, im: f64, out: *mut f64, len: usize) -> SlStatus {
    guard(|| {
        let map = borrow(map, "map")?;
        let n = map.0.n;
        if out.is_null() {
            return Err(Fail(SlStatus::NullPointer, "out is null".into()));
        }
        if len < 2 * n * n {
            return Err(Fail(SlStatus::InvalidInput, format!("out: need {} doubles, got {len}", 2 * n * n)));
        }
        let z = C64::new(re, im);
        if !(z.norm() < 1.0) {
            return Err(Fail(SlStatus::InvalidInput, "point must lie in the unit disc".into()));
        }
        let m = map.0.eval(z)?;
        let buf = std::slice::from_raw_parts_mut(out, 2 * n * n);
        for (k, v) in m.rows().into_iter().flatten().enumerate() {
            buf[2 * k] = v.re;
            buf[2 * k + 1] = v.im;
        }
        Ok(SlStatus::Ok)
    })
}

/// JSON encoding of the map.
///
/// # Safety
/// `map` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_map_to_json(map: *const SlMap, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        let map = borrow(map, "map")?;
        if out.is_null() {
            return Err(Fail(SlStatus::NullPointer, "out is null".into()));
        }
        put_json(out, &map.0)?;
        Ok(SlStatus::Ok)
    })
}

/// Parses a map previously produced by [`sl_map_to_json`].
///
/// # Safety
/// `json` must be a nul-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sl_map_from_json(json: *const c_char, out: *mut *mut SlMap) -> SlStatus {
    guard(|| {
        let map: DiscMap = serde_json::from_str(text(json, "json")?)
            .map_err(|e| Fail(SlStatus::InvalidInput, format!("map: {e}")))?;
        put(out, SlMap(map), "out")?;
        Ok(SlStatus::Ok)
    })
}

/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sl_map_free(map: *mut SlMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}
