//! C ABI over the influence diagram engine.
//!
//! Every function returns an [`AidStatus`]. On failure the message is
//! available from [`aid_last_error_message`] on the same thread until the
//! next call. Handles are opaque and owned by the caller once returned;
//! release them with the matching `*_free` function. Strings returned
//! through `out` parameters are released with [`aid_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use associate_id::analysis::{evpi, tornado};
use associate_id::io::{self, TornadoDocument};
use associate_id::{expected_utility, mrma, simulate, solve_with, validate, Error, SolveOptions};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AidStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The diagram failed validation.
    InvalidDiagram = 3,
    /// Any other model or argument error (unknown node, bad label, ...).
    ModelError = 4,
    ParseError = 5,
    IoError = 6,
    JointTooLarge = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// Opaque influence diagram.
pub struct AidDiagram {
    inner: associate_id::InfluenceDiagram,
}

/// Opaque solved policy.
pub struct AidPolicy {
    inner: associate_id::Policy,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> AidStatus {
    match err {
        Error::Invalid(_) => AidStatus::InvalidDiagram,
        Error::Parse(_) => AidStatus::ParseError,
        Error::Io { .. } => AidStatus::IoError,
        Error::JointTooLarge { .. } => AidStatus::JointTooLarge,
        _ => AidStatus::ModelError,
    }
}

enum Failure {
    Status(AidStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AidStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AidStatus::Ok,
        Ok(Err(Failure::Status(status, message))) => {
            set_error(&message);
            status
        }
        Ok(Err(Failure::Lib(e))) => {
            let mut message = format!("{}: {e}", e.code());
            if let Error::Invalid(report) = &e {
                message.push('\n');
                message.push_str(&report.to_string());
            }
            set_error(&message);
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            AidStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure::Status(AidStatus::NullArgument, format!("`{name}` is null"))
}

unsafe fn arg_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(AidStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn arg_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s)
        .expect("documents contain no nul bytes")
        .into_raw()
}

fn options() -> SolveOptions {
    SolveOptions::default()
}

/// Message for the last failed call on this thread; empty after a
/// successful call. Owned by the library.
#[no_mangle]
pub extern "C" fn aid_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads and validates a model document from `path`.
///
/// # Safety
/// `path` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aid_diagram_load(
    path: *const c_char,
    out: *mut *mut AidDiagram,
) -> AidStatus {
    guard(|| {
        let path = arg_str(path, "path")?;
        let inner = io::load_model(path)?;
        put(out, Box::into_raw(Box::new(AidDiagram { inner })), "out")
    })
}

/// Parses and validates a model document held in memory.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aid_diagram_from_json(
    json: *const c_char,
    out: *mut *mut AidDiagram,
) -> AidStatus {
    guard(|| {
        let inner = io::model_from_str(arg_str(json, "json")?)?;
        put(out, Box::into_raw(Box::new(AidDiagram { inner })), "out")
    })
}

/// Canonical model document text.
///
/// # Safety
/// `diagram` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aid_diagram_to_json(
    diagram: *const AidDiagram,
    out: *mut *mut c_char,
) -> AidStatus {
    guard(|| {
        let d = arg_ref(diagram, "diagram")?;
        put(out, owned_string(io::model_to_string(&d.inner)), "out")
    })
}

/// # Safety
/// `diagram` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aid_diagram_free(diagram: *mut AidDiagram) {
    if !diagram.is_null() {
        drop(Box::from_raw(diagram));
    }
}

/// The rover path-deviation scenario with its reference configuration.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aid_mrma_reference(out: *mut *mut AidDiagram) -> AidStatus {
    guard(|| {
        let inner = mrma::build_mrma_diagram(&mrma::reference_config())?;
        put(out, Box::into_raw(Box::new(AidDiagram { inner })), "out")
    })
}

/// Validates `diagram`, writing the error and warning counts.
/// Returns `AID_STATUS_INVALID_DIAGRAM` when there are errors.
///
/// # Safety
/// `diagram` must come from this library; the count pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn aid_diagram_validate(
    diagram: *const AidDiagram,
    out_errors: *mut usize,
    out_warnings: *mut usize,
) -> AidStatus {
    guard(|| {
        let d = arg_ref(diagram, "diagram")?;
        let report = validate(&d.inner);
        if !out_errors.is_null() {
            out_errors.write(report.errors.len());
        }
        if !out_warnings.is_null() {
            out_warnings.write(report.warnings.len());
        }
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::Invalid(report).into())
        }
    })
}

/// Optimal policy of `diagram`.
///
/// # Safety
/// `diagram` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aid_solve(
    diagram: *const AidDiagram,
    out: *mut *mut AidPolicy,
) -> AidStatus {
    guard(|| {
        let d = arg_ref(diagram, "diagram")?;
        let inner = solve_with(&d.inner, &options())?.policy;
        put(out, Box::into_raw(Box::new(AidPolicy { inner })), "out")
    })
}

/// # Safety
/// `policy` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aid_policy_meu(policy: *const AidPolicy, out: *mut f64) -> AidStatus {
    guard(|| {
        let p = arg_ref(policy, "policy")?;
        put(out, p.inner.meu, "out")
    })
}

/// Policy document text, with labels resolved against `diagram`.
///
/// # Safety
/// Both handles must come from this library, the policy solved from the
/// diagram; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aid_policy_to_json(
    diagram: *const AidDiagram,
    policy: *const AidPolicy,
    out: *mut *mut c_char,
) -> AidStatus {
    guard(|| {
        let d = arg_ref(diagram, "diagram")?;
        let p = arg_ref(policy, "policy")?;
        if p.inner.rules.len() != d.inner.decisions().len() {
            return Err(Error::PolicyMismatch("decision count differs".into()).into());
        }
        put(
            out,
            owned_string(io::policy_to_string(&d.inner, &p.inner)),
            "out",
        )
    })
}

/// # Safety
/// `policy` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aid_policy_free(policy: *mut AidPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

/// Exact expected utility of following `policy` in `diagram`.
///
/// # Safety
/// Both handles must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aid_expected_utility(
    diagram: *const AidDiagram,
    policy: *const AidPolicy,
    out: *mut f64,
) -> AidStatus {
    guard(|| {
        let d = arg_ref(diagram, "diagram")?;
        let p = arg_ref(policy, "policy")?;
        put(out, expected_utility(&d.inner, &p.inner)?, "out")
    })
}

/// Expected value of perfect information about `variable` before
/// `decision`.
///
/// # Safety
/// `diagram` must come from this library; strings nul-terminated; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn aid_evpi(
    diagram: *const AidDiagram,
    variable: *const c_char,
    decision: *const c_char,
    out: *mut f64,
) -> AidStatus {
    guard(|| {
        let d = arg_ref(diagram, "diagram")?;
        let variable = arg_str(variable, "variable")?;
        let decision = arg_str(decision, "decision")?;
        put(out, evpi(&d.inner, variable, decision)?, "out")
    })
}

/// Tornado report as a JSON document. `decisions` is `D1=a,D2=b` by label
/// (may be empty or null when the diagram has no decisions).
///
/// # Safety
/// `diagram` must come from this library; `decisions` null or
/// nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aid_tornado_json(
    diagram: *const AidDiagram,
    decisions: *const c_char,
    out: *mut *mut c_char,
) -> AidStatus {
    guard(|| {
        let d = arg_ref(diagram, "diagram")?;
        let spec = if decisions.is_null() {
            ""
        } else {
            arg_str(decisions, "decisions")?
        };
        let asg = io::parse_decision_list(&d.inner, spec)?;
        let report = tornado(&d.inner, &asg)?;
        let doc = TornadoDocument::from_report(&d.inner, &report);
        put(out, owned_string(io::to_canonical_string(&doc)), "out")
    })
}

/// Monte Carlo estimate of `policy`'s expected utility.
///
/// # Safety
/// Both handles must come from this library; `out_mean` and
/// `out_std_error` writable.
#[no_mangle]
pub unsafe extern "C" fn aid_simulate(
    diagram: *const AidDiagram,
    policy: *const AidPolicy,
    runs: u64,
    seed: u64,
    out_mean: *mut f64,
    out_std_error: *mut f64,
) -> AidStatus {
    guard(|| {
        let d = arg_ref(diagram, "diagram")?;
        let p = arg_ref(policy, "policy")?;
        if out_mean.is_null() || out_std_error.is_null() {
            return Err(null("out_mean/out_std_error"));
        }
        let report = simulate(&d.inner, &p.inner, runs, seed)?;
        out_mean.write(report.mean_utility);
        out_std_error.write(report.std_error);
        Ok(())
    })
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or come from this library, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aid_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
