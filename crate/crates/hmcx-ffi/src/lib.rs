//! C ABI over the convexity auditor: opaque handles for parsed expressions
//! and kernels, status codes mirroring the CLI exit contract, and JSON
//! strings for structured results.
//!
//! Ownership follows the usual C conventions: every `*_parse` call has a
//! matching `*_free`, every string the library hands out is released with
//! [`hmcx_string_free`], and null arguments are rejected, never
//! dereferenced. A failing call returns a non-`Ok` status (or null) and
//! leaves a message retrievable with [`hmcx_last_error`] on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use hmcx::inequalities::AuditError;
use hmcx::reductions::ReductionError;
use hmcx::{
    audit, check_membership, verify_reduction, AuditSpec, Direction, Domain, FunctionExpr,
    HMParams, InequalityId, Kernel, ReductionInput, ToleranceSpec, Verdict,
};

/// Outcome of a call. Numeric values match the CLI exit codes: 0 for a
/// clean result, 1 when the property under test fails (a violation or a
/// reduction mismatch), 2 for invalid input, 3 for a numerical failure
/// while evaluating.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmcxStatus {
    Ok = 0,
    Violated = 1,
    Invalid = 2,
    Numerical = 3,
}

/// Orientation of the membership test: `Convex` checks the defining
/// inequality as stated, `Concave` checks it with both sides swapped.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmcxDirection {
    Convex = 0,
    Concave = 1,
}

/// Opaque parsed function of one variable. Create with
/// [`hmcx_expr_parse`], release with [`hmcx_expr_free`].
pub struct HmcxExpr(FunctionExpr);

/// Opaque kernel (the weight `h` of the convexity class). Create with
/// [`hmcx_kernel_parse`], release with [`hmcx_kernel_free`].
pub struct HmcxKernel(Kernel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl std::fmt::Display) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(text).expect("NUL bytes were stripped"));
    });
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().take());
}

/// Read a required C string argument; sets the error message on failure.
///
/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Option<&'a str> {
    if ptr.is_null() {
        set_error(format_args!("{what} must not be null"));
        return None;
    }
    match unsafe { CStr::from_ptr(ptr) }.to_str() {
        Ok(s) => Some(s),
        Err(_) => {
            set_error(format_args!("{what} is not valid UTF-8"));
            None
        }
    }
}

/// Borrow a required handle argument; sets the error message on failure.
///
/// # Safety
/// `ptr` must be null or a live pointer obtained from this library.
unsafe fn required_ref<'a, T>(ptr: *const T, what: &str) -> Option<&'a T> {
    if ptr.is_null() {
        set_error(format_args!("{what} must not be null"));
        None
    } else {
        Some(unsafe { &*ptr })
    }
}

/// Hand a JSON report to the caller through `out_json`.
///
/// # Safety
/// `out_json` must be null or point to writable memory for one pointer.
unsafe fn deliver_json<T: serde::Serialize>(out_json: *mut *mut c_char, report: &T) {
    if out_json.is_null() {
        return;
    }
    let text = serde_json::to_string_pretty(report).expect("reports serialize");
    let owned = CString::new(text).expect("JSON contains no NUL");
    unsafe { *out_json = owned.into_raw() };
}

/// Run a compute body, converting a library panic into a status instead of
/// letting it unwind across the ABI boundary (which would abort).
fn guarded(body: impl FnOnce() -> HmcxStatus) -> HmcxStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal error: operation panicked");
            HmcxStatus::Numerical
        }
    }
}

fn audit_status(error: &AuditError) -> HmcxStatus {
    match error {
        AuditError::InvalidInterval { .. }
        | AuditError::MOutOfRange { .. }
        | AuditError::InvalidTolerance { .. }
        | AuditError::Orientation { .. }
        | AuditError::NonPositiveKernelHalf { .. }
        | AuditError::PowerKernelRequired => HmcxStatus::Invalid,
        AuditError::RequiredPoint { .. }
        | AuditError::KernelValue { .. }
        | AuditError::Moments(_)
        | AuditError::Integrand { .. }
        | AuditError::IntegralDivergent { .. }
        | AuditError::IntegralNoConvergence { .. } => HmcxStatus::Numerical,
    }
}

fn reduction_status(error: &ReductionError) -> HmcxStatus {
    match error {
        ReductionError::Audit(inner) => audit_status(inner),
        _ => HmcxStatus::Invalid,
    }
}

/// Parse a function of one variable, e.g. `"x^2"` or `"exp(x) - 1"`.
/// `variable` names the free variable; pass null for the default `"x"`.
/// Returns null on failure (see [`hmcx_last_error`]). Release the result
/// with [`hmcx_expr_free`].
///
/// # Safety
/// `text` must point to a NUL-terminated string; `variable` may be null or
/// do the same.
#[no_mangle]
pub unsafe extern "C" fn hmcx_expr_parse(
    text: *const c_char,
    variable: *const c_char,
) -> *mut HmcxExpr {
    clear_error();
    let Some(text) = (unsafe { required_str(text, "expression text") }) else {
        return std::ptr::null_mut();
    };
    let variable = if variable.is_null() {
        "x"
    } else {
        match unsafe { required_str(variable, "variable name") } {
            Some(v) => v,
            None => return std::ptr::null_mut(),
        }
    };
    match FunctionExpr::parse(text, variable) {
        Ok(expr) => Box::into_raw(Box::new(HmcxExpr(expr))),
        Err(e) => {
            set_error(e);
            std::ptr::null_mut()
        }
    }
}

/// Evaluate a parsed expression at `x`, writing the value to `out_value`.
///
/// # Safety
/// `expr` must be a live handle from [`hmcx_expr_parse`]; `out_value` must
/// point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn hmcx_expr_eval(
    expr: *const HmcxExpr,
    x: f64,
    out_value: *mut f64,
) -> HmcxStatus {
    clear_error();
    let Some(expr) = (unsafe { required_ref(expr, "expression handle") }) else {
        return HmcxStatus::Invalid;
    };
    if out_value.is_null() {
        set_error("out_value must not be null");
        return HmcxStatus::Invalid;
    }
    match expr.0.evaluate(x) {
        Ok(v) => {
            unsafe { *out_value = v };
            HmcxStatus::Ok
        }
        Err(e) => {
            set_error(e);
            HmcxStatus::Numerical
        }
    }
}

/// Release an expression handle. Null is a no-op.
///
/// # Safety
/// `expr` must be null or a handle from [`hmcx_expr_parse`] that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn hmcx_expr_free(expr: *mut HmcxExpr) {
    if !expr.is_null() {
        drop(unsafe { Box::from_raw(expr) });
    }
}

/// Parse a kernel specification: `"identity"`, `"one"`, `"reciprocal"`,
/// `"power:S"`, or `"custom:EXPR"` with `EXPR` a function of `t`. Returns
/// null on failure. Release the result with [`hmcx_kernel_free`].
///
/// # Safety
/// `spec` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn hmcx_kernel_parse(spec: *const c_char) -> *mut HmcxKernel {
    clear_error();
    let Some(spec) = (unsafe { required_str(spec, "kernel spec") }) else {
        return std::ptr::null_mut();
    };
    match Kernel::parse_spec(spec) {
        Ok(kernel) => Box::into_raw(Box::new(HmcxKernel(kernel))),
        Err(e) => {
            set_error(e);
            std::ptr::null_mut()
        }
    }
}

/// Release a kernel handle. Null is a no-op.
///
/// # Safety
/// `kernel` must be null or a handle from [`hmcx_kernel_parse`] that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn hmcx_kernel_free(kernel: *mut HmcxKernel) {
    if !kernel.is_null() {
        drop(unsafe { Box::from_raw(kernel) });
    }
}

/// Search `[0, b_cap]` for a violation of `(h, m)`-convexity of `f`,
/// spending at most `budget` evaluations. On `Ok` or `Violated`,
/// `*out_json` (when `out_json` is non-null) receives the full report —
/// verdict, worst certificate, largest defect seen — as a JSON string to
/// release with [`hmcx_string_free`].
///
/// # Safety
/// `f` and `h` must be live handles; `out_json` must be null or point to
/// writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn hmcx_check_membership(
    f: *const HmcxExpr,
    h: *const HmcxKernel,
    m: f64,
    direction: HmcxDirection,
    b_cap: f64,
    budget: u64,
    seed: u64,
    out_json: *mut *mut c_char,
) -> HmcxStatus {
    clear_error();
    if !out_json.is_null() {
        unsafe { *out_json = std::ptr::null_mut() };
    }
    let Some(f) = (unsafe { required_ref(f, "function handle") }) else {
        return HmcxStatus::Invalid;
    };
    let Some(h) = (unsafe { required_ref(h, "kernel handle") }) else {
        return HmcxStatus::Invalid;
    };
    guarded(|| {
        let direction = match direction {
            HmcxDirection::Convex => Direction::Convex,
            HmcxDirection::Concave => Direction::Concave,
        };
        let params = match HMParams::new(h.0.clone(), m, direction) {
            Ok(p) => p,
            Err(e) => {
                set_error(e);
                return HmcxStatus::Invalid;
            }
        };
        let domain = match Domain::new(b_cap) {
            Ok(d) => d,
            Err(e) => {
                set_error(e);
                return HmcxStatus::Invalid;
            }
        };
        match check_membership(&f.0, &params, &domain, budget, seed) {
            Ok(report) => {
                unsafe { deliver_json(out_json, &report) };
                match report.verdict {
                    Verdict::NoViolationFound => HmcxStatus::Ok,
                    Verdict::Violated => HmcxStatus::Violated,
                }
            }
            Err(e) => {
                let status = match e {
                    hmcx::convexity::ConvexityError::Eval(_) => HmcxStatus::Numerical,
                    _ => HmcxStatus::Invalid,
                };
                set_error(e);
                status
            }
        }
    })
}

/// Evaluate the inequality chain named by `inequality_id` (`"thm4"`,
/// `"thm5"`, `"thm8"`, `"m1"`, `"m2"`, `"m3"`, `"s"`, `"q"`, `"p"`, or
/// `"h1"`) for `f` under kernel `h` on `[a, b]`. Negative or non-finite
/// tolerances are rejected; pass `1e-9` for both to match the CLI
/// defaults. On `Ok` or `Violated`, `*out_json` receives the term values,
/// per-pair verdicts, and overall result as JSON.
///
/// # Safety
/// `inequality_id` must point to a NUL-terminated string; `f` and `h` must
/// be live handles; `out_json` must be null or point to writable memory
/// for one pointer.
#[no_mangle]
pub unsafe extern "C" fn hmcx_audit(
    inequality_id: *const c_char,
    f: *const HmcxExpr,
    h: *const HmcxKernel,
    m: f64,
    a: f64,
    b: f64,
    tol_abs: f64,
    tol_rel: f64,
    out_json: *mut *mut c_char,
) -> HmcxStatus {
    clear_error();
    if !out_json.is_null() {
        unsafe { *out_json = std::ptr::null_mut() };
    }
    let Some(id) = (unsafe { required_str(inequality_id, "inequality id") }) else {
        return HmcxStatus::Invalid;
    };
    let Some(f) = (unsafe { required_ref(f, "function handle") }) else {
        return HmcxStatus::Invalid;
    };
    let Some(h) = (unsafe { required_ref(h, "kernel handle") }) else {
        return HmcxStatus::Invalid;
    };
    let id = match InequalityId::from_str(id) {
        Ok(id) => id,
        Err(e) => {
            set_error(e);
            return HmcxStatus::Invalid;
        }
    };
    guarded(|| {
        let params = match HMParams::new(h.0.clone(), m, Direction::Convex) {
            Ok(p) => p,
            Err(e) => {
                set_error(e);
                return HmcxStatus::Invalid;
            }
        };
        let spec = AuditSpec {
            f: f.0.clone(),
            params,
            a,
            b,
            tol: ToleranceSpec {
                abs: tol_abs,
                rel: tol_rel,
            },
        };
        match audit(&spec, id) {
            Ok(report) => {
                unsafe { deliver_json(out_json, &report) };
                match report.overall {
                    hmcx::inequalities::Overall::Holds => HmcxStatus::Ok,
                    hmcx::inequalities::Overall::Violated => HmcxStatus::Violated,
                }
            }
            Err(e) => {
                let status = audit_status(&e);
                set_error(e);
                status
            }
        }
    })
}

/// Verify the specialization case named by `case_id` (e.g. `"thm4-to-m1"`)
/// on `f` over `[a, b]`. `s` supplies the exponent for cases that need
/// one — pass NaN otherwise; `h` supplies the kernel for cases that take a
/// caller-chosen one — pass null otherwise. On `Ok` or `Violated`,
/// `*out_json` receives both evaluated chains and the per-pair comparison
/// as JSON. `Violated` here means the chains did not match.
///
/// # Safety
/// `case_id` must point to a NUL-terminated string; `f` must be a live
/// handle; `h` must be null or a live handle; `out_json` must be null or
/// point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn hmcx_reduce(
    case_id: *const c_char,
    f: *const HmcxExpr,
    m: f64,
    a: f64,
    b: f64,
    s: f64,
    h: *const HmcxKernel,
    out_json: *mut *mut c_char,
) -> HmcxStatus {
    clear_error();
    if !out_json.is_null() {
        unsafe { *out_json = std::ptr::null_mut() };
    }
    let Some(case) = (unsafe { required_str(case_id, "case id") }) else {
        return HmcxStatus::Invalid;
    };
    let Some(f) = (unsafe { required_ref(f, "function handle") }) else {
        return HmcxStatus::Invalid;
    };
    let kernel = if h.is_null() {
        None
    } else {
        Some(unsafe { &*h }.0.clone())
    };
    guarded(|| {
        let input = ReductionInput {
            f: f.0.clone(),
            m,
            a,
            b,
            s: if s.is_nan() { None } else { Some(s) },
            h: kernel,
        };
        match verify_reduction(case, &input) {
            Ok(report) => {
                unsafe { deliver_json(out_json, &report) };
                if report.matches {
                    HmcxStatus::Ok
                } else {
                    HmcxStatus::Violated
                }
            }
            Err(e) => {
                let status = reduction_status(&e);
                set_error(e);
                status
            }
        }
    })
}

/// Message for the most recent failure on this thread, or null if the last
/// call succeeded. The pointer is valid until the next library call on the
/// same thread; do not free it.
#[no_mangle]
pub extern "C" fn hmcx_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Release a string returned through an `out_json` parameter. Null is a
/// no-op.
///
/// # Safety
/// `text` must be null or a string obtained from this library that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn hmcx_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    unsafe fn take_json(ptr: *mut c_char) -> serde_json::Value {
        assert!(!ptr.is_null(), "expected a JSON payload");
        let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_owned();
        unsafe { hmcx_string_free(ptr) };
        serde_json::from_str(&text).unwrap()
    }

    fn last_error_text() -> String {
        let ptr = hmcx_last_error();
        assert!(!ptr.is_null(), "expected an error message");
        unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_owned()
    }

    #[test]
    fn expr_round_trip() {
        let text = cstr("x^2 + 1");
        let expr = unsafe { hmcx_expr_parse(text.as_ptr(), ptr::null()) };
        assert!(!expr.is_null());

        let mut value = 0.0;
        let status = unsafe { hmcx_expr_eval(expr, 3.0, &mut value) };
        assert_eq!(status, HmcxStatus::Ok);
        assert_eq!(value, 10.0);

        unsafe { hmcx_expr_free(expr) };
    }

    #[test]
    fn parse_failures_leave_a_message() {
        let broken = cstr("x +");
        let expr = unsafe { hmcx_expr_parse(broken.as_ptr(), ptr::null()) };
        assert!(expr.is_null());
        assert!(!last_error_text().is_empty());

        let expr = unsafe { hmcx_expr_parse(ptr::null(), ptr::null()) };
        assert!(expr.is_null());
        assert!(last_error_text().contains("null"));

        let bad_kernel = cstr("power:2.5");
        let kernel = unsafe { hmcx_kernel_parse(bad_kernel.as_ptr()) };
        assert!(kernel.is_null());
        assert!(!last_error_text().is_empty());
    }

    #[test]
    fn eval_outside_domain_is_numerical() {
        let text = cstr("sqrt(x)");
        let expr = unsafe { hmcx_expr_parse(text.as_ptr(), ptr::null()) };
        let mut value = 0.0;
        let status = unsafe { hmcx_expr_eval(expr, -1.0, &mut value) };
        assert_eq!(status, HmcxStatus::Numerical);
        assert!(!last_error_text().is_empty());
        unsafe { hmcx_expr_free(expr) };
    }

    #[test]
    fn membership_violation_reports_certificate() {
        let f = unsafe { hmcx_expr_parse(cstr("sqrt(x)").as_ptr(), ptr::null()) };
        let h = unsafe { hmcx_kernel_parse(cstr("identity").as_ptr()) };
        let mut json_out: *mut c_char = ptr::null_mut();
        let status = unsafe {
            hmcx_check_membership(
                f,
                h,
                1.0,
                HmcxDirection::Convex,
                1.0,
                50_000,
                42,
                &mut json_out,
            )
        };
        assert_eq!(status, HmcxStatus::Violated);
        let v = unsafe { take_json(json_out) };
        assert_eq!(v["verdict"], "violated");
        assert!(v["worst"]["gap"].as_f64().unwrap() > 0.2);
        unsafe { hmcx_expr_free(f) };
        unsafe { hmcx_kernel_free(h) };
    }

    #[test]
    fn membership_clean_run_is_ok() {
        let f = unsafe { hmcx_expr_parse(cstr("x^2").as_ptr(), ptr::null()) };
        let h = unsafe { hmcx_kernel_parse(cstr("identity").as_ptr()) };
        let mut json_out: *mut c_char = ptr::null_mut();
        let status = unsafe {
            hmcx_check_membership(
                f,
                h,
                1.0,
                HmcxDirection::Convex,
                1.0,
                20_000,
                7,
                &mut json_out,
            )
        };
        assert_eq!(status, HmcxStatus::Ok);
        let v = unsafe { take_json(json_out) };
        assert_eq!(v["verdict"], "no-violation-found");
        assert!(v["worst"].is_null());
        unsafe { hmcx_expr_free(f) };
        unsafe { hmcx_kernel_free(h) };
    }

    #[test]
    fn membership_rejects_bad_parameters() {
        let f = unsafe { hmcx_expr_parse(cstr("x^2").as_ptr(), ptr::null()) };
        let h = unsafe { hmcx_kernel_parse(cstr("identity").as_ptr()) };
        let status = unsafe {
            hmcx_check_membership(
                f,
                h,
                2.0,
                HmcxDirection::Convex,
                1.0,
                20_000,
                0,
                ptr::null_mut(),
            )
        };
        assert_eq!(status, HmcxStatus::Invalid);
        assert!(last_error_text().contains("m"));

        let status = unsafe {
            hmcx_check_membership(
                ptr::null(),
                h,
                1.0,
                HmcxDirection::Convex,
                1.0,
                20_000,
                0,
                ptr::null_mut(),
            )
        };
        assert_eq!(status, HmcxStatus::Invalid);
        unsafe { hmcx_expr_free(f) };
        unsafe { hmcx_kernel_free(h) };
    }

    #[test]
    fn audit_matches_library_results() {
        let f = unsafe { hmcx_expr_parse(cstr("x^2").as_ptr(), ptr::null()) };
        let h = unsafe { hmcx_kernel_parse(cstr("identity").as_ptr()) };
        let id = cstr("thm5");
        let mut json_out: *mut c_char = ptr::null_mut();
        let status = unsafe {
            hmcx_audit(
                id.as_ptr(),
                f,
                h,
                1.0,
                0.0,
                1.0,
                1e-9,
                1e-9,
                &mut json_out,
            )
        };
        assert_eq!(status, HmcxStatus::Ok);
        let v = unsafe { take_json(json_out) };
        assert_eq!(v["overall"], "holds");
        let terms = v["terms"].as_array().unwrap();
        assert_eq!(terms.len(), 3);
        assert!((terms[0]["value"].as_f64().unwrap() - 0.25).abs() < 1e-9);
        unsafe { hmcx_expr_free(f) };
        unsafe { hmcx_kernel_free(h) };
    }

    #[test]
    fn audit_status_partition() {
        let f = unsafe { hmcx_expr_parse(cstr("x^2").as_ptr(), ptr::null()) };
        let h = unsafe { hmcx_kernel_parse(cstr("identity").as_ptr()) };
        let rec = unsafe { hmcx_kernel_parse(cstr("reciprocal").as_ptr()) };

        // Unknown chain id.
        let status = unsafe {
            hmcx_audit(
                cstr("thm99").as_ptr(),
                f,
                h,
                1.0,
                0.0,
                1.0,
                1e-9,
                1e-9,
                ptr::null_mut(),
            )
        };
        assert_eq!(status, HmcxStatus::Invalid);

        // Backwards interval.
        let status = unsafe {
            hmcx_audit(
                cstr("thm5").as_ptr(),
                f,
                h,
                1.0,
                1.0,
                0.0,
                1e-9,
                1e-9,
                ptr::null_mut(),
            )
        };
        assert_eq!(status, HmcxStatus::Invalid);

        // Divergent kernel moments surface as a numerical failure.
        let status = unsafe {
            hmcx_audit(
                cstr("thm4").as_ptr(),
                f,
                rec,
                1.0,
                0.0,
                1.0,
                1e-9,
                1e-9,
                ptr::null_mut(),
            )
        };
        assert_eq!(status, HmcxStatus::Numerical);
        assert!(last_error_text().contains("diverge"));

        unsafe { hmcx_expr_free(f) };
        unsafe { hmcx_kernel_free(h) };
        unsafe { hmcx_kernel_free(rec) };
    }

    #[test]
    fn reduce_match_and_mismatch() {
        let f = unsafe { hmcx_expr_parse(cstr("x^2").as_ptr(), ptr::null()) };
        let mut json_out: *mut c_char = ptr::null_mut();
        let status = unsafe {
            hmcx_reduce(
                cstr("thm4-to-m1").as_ptr(),
                f,
                0.5,
                1.0,
                2.0,
                f64::NAN,
                ptr::null(),
                &mut json_out,
            )
        };
        assert_eq!(status, HmcxStatus::Ok);
        let v = unsafe { take_json(json_out) };
        assert_eq!(v["matches"], true);

        // The m2 specialization only coincides at m = 1.
        let status = unsafe {
            hmcx_reduce(
                cstr("thm5-to-m2").as_ptr(),
                f,
                0.5,
                1.0,
                2.0,
                f64::NAN,
                ptr::null(),
                &mut json_out,
            )
        };
        assert_eq!(status, HmcxStatus::Violated);
        let v = unsafe { take_json(json_out) };
        assert_eq!(v["matches"], false);

        // Stray s on a case that does not take one.
        let status = unsafe {
            hmcx_reduce(
                cstr("thm4-to-m1").as_ptr(),
                f,
                0.5,
                1.0,
                2.0,
                0.5,
                ptr::null(),
                ptr::null_mut(),
            )
        };
        assert_eq!(status, HmcxStatus::Invalid);

        // Unknown case.
        let status = unsafe {
            hmcx_reduce(
                cstr("no-such-case").as_ptr(),
                f,
                1.0,
                0.0,
                1.0,
                f64::NAN,
                ptr::null(),
                ptr::null_mut(),
            )
        };
        assert_eq!(status, HmcxStatus::Invalid);

        unsafe { hmcx_expr_free(f) };
    }

    #[test]
    fn frees_accept_null() {
        unsafe {
            hmcx_expr_free(ptr::null_mut());
            hmcx_kernel_free(ptr::null_mut());
            hmcx_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn last_error_clears_on_success() {
        let broken = cstr("x +");
        let expr = unsafe { hmcx_expr_parse(broken.as_ptr(), ptr::null()) };
        assert!(expr.is_null());
        assert!(!hmcx_last_error().is_null());

        let fine = cstr("x");
        let expr = unsafe { hmcx_expr_parse(fine.as_ptr(), ptr::null()) };
        assert!(!expr.is_null());
        assert!(hmcx_last_error().is_null());
        unsafe { hmcx_expr_free(expr) };
    }
}
