//! C interface to the certified path tracker.
//!
//! Systems, homotopies and traces live behind opaque handles created and
//! destroyed by this library. Every fallible call returns a [`KtStatus`];
//! on failure, [`kt_last_error`] holds a message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use krawczyk_track::homotopy::AffineHomotopy;
use krawczyk_track::krawczyk::krawczyk_test;
use krawczyk_track::polysys::PolySystem;
use krawczyk_track::tracker::{track, TrackMode, TrackOptions, TrackTrace};
use krawczyk_track::Error;
use num_complex::Complex64;

/// A square polynomial system with point coefficients.
pub struct KtSystem(PolySystem);

/// A straight-line homotopy between a start and a target system.
pub struct KtHomotopy(AffineHomotopy);

/// The record of one tracked path.
pub struct KtTrace(TrackTrace);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Usage = 4,
    Domain = 5,
    SingularJacobian = 6,
    RefinementDiverged = 7,
    StepUnderflow = 8,
    StepLimit = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KtMode {
    Adaptive = 0,
    Apriori = 1,
}

/// Outcome of a single Krawczyk test.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KtVerdict {
    /// Max-norm of the Krawczyk operator.
    pub norm: f64,
    /// The test passes when `norm` is strictly below this.
    pub threshold: f64,
    pub passed: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Utf8,
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn status_of(e: &Error) -> KtStatus {
    match e {
        Error::Domain(_) => KtStatus::Domain,
        Error::Usage(_) => KtStatus::Usage,
        Error::SingularJacobian => KtStatus::SingularJacobian,
        Error::RefinementDiverged { .. } => KtStatus::RefinementDiverged,
        Error::StepUnderflow { .. } => KtStatus::StepUnderflow,
        Error::StepLimit { .. } => KtStatus::StepLimit,
        Error::Parse(_) => KtStatus::Parse,
        Error::Io(_) => KtStatus::Io,
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KtStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            KtStatus::NullPointer
        }
        Ok(Err(Failure::Utf8)) => {
            set_error("input is not valid UTF-8".into());
            KtStatus::InvalidUtf8
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            KtStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8)
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn point_arg(re: *const f64, im: *const f64, n: usize) -> Result<Vec<Complex64>, Failure> {
    if re.is_null() {
        return Err(Failure::Null("re"));
    }
    if im.is_null() {
        return Err(Failure::Null("im"));
    }
    let (re, im) = (slice::from_raw_parts(re, n), slice::from_raw_parts(im, n));
    Ok(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect())
}

unsafe fn write_point(z: &[Complex64], out_re: *mut f64, out_im: *mut f64, n: usize) -> Result<(), Failure> {
    if out_re.is_null() {
        return Err(Failure::Null("out_re"));
    }
    if out_im.is_null() {
        return Err(Failure::Null("out_im"));
    }
    if n != z.len() {
        return Err(Error::Usage(format!("buffer holds {n} coordinates, result has {}", z.len())).into());
    }
    let (re, im) = (slice::from_raw_parts_mut(out_re, n), slice::from_raw_parts_mut(out_im, n));
    for (k, v) in z.iter().enumerate() {
        re[k] = v.re;
        im[k] = v.im;
    }
    Ok(())
}

fn check_dim(n: usize, expected: usize) -> Result<(), Failure> {
    if n != expected {
        return Err(Error::Usage(format!("point has {n} coordinates, expected {expected}")).into());
    }
    Ok(())
}

/// Message for the most recent failure on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a system from `{"n": n, "polys": [[{"c": [re, im], "e": [...]}, ...], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kt_system_from_json(json: *const c_char, out: *mut *mut KtSystem) -> KtStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let f = PolySystem::from_json_str(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(KtSystem(f)));
        Ok(())
    })
}

/// Number of variables, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kt_system_dim(sys: *const KtSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.0.dim())
}

/// Evaluates the system at a point in floating point.
///
/// # Safety
/// `sys` must be a live handle; all four buffers must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn kt_system_eval(
    sys: *const KtSystem,
    re: *const f64,
    im: *const f64,
    n: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> KtStatus {
    guard(|| {
        let f = &ref_arg(sys, "sys")?.0;
        check_dim(n, f.dim())?;
        let x = point_arg(re, im, n)?;
        write_point(&f.eval_point(&x), out_re, out_im, n)
    })
}

/// # Safety
/// `sys` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kt_system_free(sys: *mut KtSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Runs the Krawczyk test on `x + radius B` with `Y = JF(x)^{-1}` at threshold `rho`.
///
/// # Safety
/// `sys` must be a live handle, `re` and `im` must hold `n` doubles, and
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kt_certify(
    sys: *const KtSystem,
    re: *const f64,
    im: *const f64,
    n: usize,
    radius: f64,
    rho: f64,
    out: *mut KtVerdict,
) -> KtStatus {
    guard(|| {
        let f = &ref_arg(sys, "sys")?.0;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        check_dim(n, f.dim())?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Usage(format!("radius must be positive, got {radius}")).into());
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Usage(format!("rho must lie in (0, 1), got {rho}")).into());
        }
        let x = point_arg(re, im, n)?;
        let y = f.jacobian_point(&x).approx_inverse()?;
        let v = krawczyk_test(f, &x, radius, &y, rho);
        *out = KtVerdict { norm: v.norm, threshold: v.threshold, passed: v.passed };
        Ok(())
    })
}

/// Parses `{"start": system, "target": system, "gamma": [re, im] | "random", "seed": k}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kt_homotopy_from_json(json: *const c_char, out: *mut *mut KtHomotopy) -> KtStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let h = AffineHomotopy::from_json_str(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(KtHomotopy(h)));
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kt_homotopy_dim(h: *const KtHomotopy) -> usize {
    h.as_ref().map_or(0, |h| h.0.dim())
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kt_homotopy_free(h: *mut KtHomotopy) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Tracks one start solution from `t = 0` to `t = 1`.
///
/// # Safety
/// `h` must be a live handle, `re` and `im` must hold `n` doubles, and `out`
/// must be a valid pointer. On success `*out` owns a trace to be released
/// with [`kt_trace_free`].
#[no_mangle]
pub unsafe extern "C" fn kt_track(
    h: *const KtHomotopy,
    re: *const f64,
    im: *const f64,
    n: usize,
    mode: KtMode,
    rho: f64,
    tau: f64,
    out: *mut *mut KtTrace,
) -> KtStatus {
    guard(|| {
        let h = &ref_arg(h, "homotopy")?.0;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        check_dim(n, h.dim())?;
        let start = point_arg(re, im, n)?;
        let mode = match mode {
            KtMode::Adaptive => TrackMode::Adaptive,
            KtMode::Apriori => TrackMode::Apriori,
        };
        let opts = TrackOptions { rho, tau, ..TrackOptions::default() };
        let trace = track(h, &start, mode, &opts)?;
        *out = Box::into_raw(Box::new(KtTrace(trace)));
        Ok(())
    })
}

/// Number of accepted steps, or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kt_trace_steps(trace: *const KtTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.step_count())
}

/// Number of Krawczyk evaluations, or 0 for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kt_trace_iterations(trace: *const KtTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.iterations)
}

/// Certification radius at `t = 1`, or NaN for a null handle.
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kt_trace_final_radius(trace: *const KtTrace) -> f64 {
    trace.as_ref().map_or(f64::NAN, |t| t.0.final_point.r)
}

/// Copies the certified endpoint at `t = 1`.
///
/// # Safety
/// `trace` must be a live handle and both buffers must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn kt_trace_final_point(
    trace: *const KtTrace,
    out_re: *mut f64,
    out_im: *mut f64,
    n: usize,
) -> KtStatus {
    guard(|| {
        let t = &ref_arg(trace, "trace")?.0;
        write_point(&t.final_point.x, out_re, out_im, n)
    })
}

/// The full trace as JSON, or null for a null handle. Release with [`kt_string_free`].
///
/// # Safety
/// `trace` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kt_trace_to_json(trace: *const KtTrace) -> *mut c_char {
    match trace.as_ref() {
        Some(t) => CString::new(t.0.to_json_string()).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kt_trace_free(trace: *mut KtTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
