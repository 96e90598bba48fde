//! C interface to the scenario runner.
//!
//! Scenarios and reports are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns an
//! [`EnlStatus`]; the message of the last error on the calling thread is
//! available from [`enl_last_error`]. Strings returned by the library are
//! released with [`enl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use enlargement::cli::{
    apply_overrides, parse_scenario, parse_scenario_str, run_scenario, validate_scenario, Overrides, Report, Scenario,
};

/// Status codes. `ENL_CHECK_FAILED` is only returned by [`enl_scenario_run`]
/// when the run completed but some check did not pass.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnlStatus {
    EnlOk = 0,
    EnlCheckFailed = 1,
    EnlEngineError = 2,
    EnlNullArgument = 3,
    EnlInvalidUtf8 = 4,
    EnlParseError = 5,
    EnlPanic = 6,
}

/// A parsed and validated scenario.
pub struct EnlScenario {
    inner: Scenario,
}

/// The report of a scenario run.
pub struct EnlReport {
    inner: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `body`, turning panics into `EnlPanic`.
fn guard(body: impl FnOnce() -> EnlStatus) -> EnlStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            EnlStatus::EnlPanic
        }
    }
}

/// Borrows a C string as UTF-8.
///
/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, EnlStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(EnlStatus::EnlNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        EnlStatus::EnlInvalidUtf8
    })
}

fn into_string(text: &str) -> *mut c_char {
    CString::new(text.replace('\0', " ")).map_or(std::ptr::null_mut(), CString::into_raw)
}

fn store_scenario(parsed: Result<Scenario, String>, out: *mut *mut EnlScenario) -> EnlStatus {
    match parsed {
        Ok(inner) => {
            // SAFETY: callers check `out` for null before parsing.
            unsafe { *out = Box::into_raw(Box::new(EnlScenario { inner })) };
            EnlStatus::EnlOk
        }
        Err(message) => {
            set_error(message);
            EnlStatus::EnlParseError
        }
    }
}

fn validated(s: Scenario) -> Result<Scenario, String> {
    validate_scenario(&s).map_err(|d| d.to_string())?;
    Ok(s)
}

/// Parses a scenario from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enl_scenario_parse(toml: *const c_char, out: *mut *mut EnlScenario) -> EnlStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return EnlStatus::EnlNullArgument;
        }
        let text = match read_str(toml) {
            Ok(t) => t,
            Err(status) => return status,
        };
        store_scenario(parse_scenario_str(text).map_err(|d| d.to_string()).and_then(validated), out)
    })
}

/// Loads a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enl_scenario_load(path: *const c_char, out: *mut *mut EnlScenario) -> EnlStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return EnlStatus::EnlNullArgument;
        }
        let path = match read_str(path) {
            Ok(t) => t,
            Err(status) => return status,
        };
        store_scenario(parse_scenario(Path::new(path)).map_err(|d| d.to_string()).and_then(validated), out)
    })
}

/// Overrides the seed of every random component of the scenario.
///
/// # Safety
/// `scenario` must be a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn enl_scenario_set_seed(scenario: *mut EnlScenario, seed: u64) -> EnlStatus {
    guard(|| match scenario.as_mut() {
        Some(s) => {
            apply_overrides(&mut s.inner, &Overrides { seed: Some(seed), ..Overrides::default() });
            EnlStatus::EnlOk
        }
        None => {
            set_error("null scenario");
            EnlStatus::EnlNullArgument
        }
    })
}

/// Overrides the Monte Carlo path count.
///
/// # Safety
/// `scenario` must be a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn enl_scenario_set_paths(scenario: *mut EnlScenario, paths: usize) -> EnlStatus {
    guard(|| match scenario.as_mut() {
        Some(s) => {
            let mut candidate = s.inner.clone();
            apply_overrides(&mut candidate, &Overrides { paths: Some(paths), ..Overrides::default() });
            match validate_scenario(&candidate) {
                Ok(()) => {
                    s.inner = candidate;
                    EnlStatus::EnlOk
                }
                Err(d) => {
                    set_error(d.to_string());
                    EnlStatus::EnlParseError
                }
            }
        }
        None => {
            set_error("null scenario");
            EnlStatus::EnlNullArgument
        }
    })
}

/// Runs every check of the scenario. On `EnlOk` or `EnlCheckFailed` a report
/// is stored in `out`.
///
/// # Safety
/// `scenario` must be a handle from this library and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn enl_scenario_run(scenario: *const EnlScenario, out: *mut *mut EnlReport) -> EnlStatus {
    guard(|| {
        let Some(s) = scenario.as_ref() else {
            set_error("null scenario");
            return EnlStatus::EnlNullArgument;
        };
        if out.is_null() {
            set_error("null output pointer");
            return EnlStatus::EnlNullArgument;
        }
        match run_scenario(&s.inner) {
            Ok(report) => {
                let passed = report.passed;
                *out = Box::into_raw(Box::new(EnlReport { inner: report }));
                if passed {
                    EnlStatus::EnlOk
                } else {
                    EnlStatus::EnlCheckFailed
                }
            }
            Err(e) => {
                set_error(e.to_string());
                EnlStatus::EnlEngineError
            }
        }
    })
}

/// 1 when every check passed, 0 when some failed, -1 for a null handle.
///
/// # Safety
/// `report` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn enl_report_passed(report: *const EnlReport) -> c_int {
    match report.as_ref() {
        Some(r) => c_int::from(r.inner.passed),
        None => -1,
    }
}

/// Number of checks in the report, 0 for a null handle.
///
/// # Safety
/// `report` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn enl_report_check_count(report: *const EnlReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.checks.len())
}

/// The report as JSON; release with [`enl_string_free`]. Null for a null handle.
///
/// # Safety
/// `report` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn enl_report_json(report: *const EnlReport) -> *mut c_char {
    report.as_ref().map_or(std::ptr::null_mut(), |r| into_string(&r.inner.to_json()))
}

/// The report as a text summary; release with [`enl_string_free`].
///
/// # Safety
/// `report` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn enl_report_text(report: *const EnlReport) -> *mut c_char {
    report.as_ref().map_or(std::ptr::null_mut(), |r| into_string(&r.inner.to_text()))
}

/// # Safety
/// `scenario` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn enl_scenario_free(scenario: *mut EnlScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// # Safety
/// `report` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn enl_report_free(report: *mut EnlReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn enl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last error on this thread, or null. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn enl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn enl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn last_error() -> String {
        let p = enl_last_error();
        assert!(!p.is_null());
        unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
    }

    fn take(s: *mut c_char) -> String {
        assert!(!s.is_null());
        let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
        unsafe { enl_string_free(s) };
        out
    }

    const NEVER: &str = r#"
name = "never"
mode = "exact"
checks = ["drift-before-default", "harness"]

[base]
branches = [2, 2]

[model]
kind = "fixed"
time = 3
"#;

    #[test]
    fn parse_run_and_render() {
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { enl_scenario_parse(c(NEVER).as_ptr(), &mut s) }, EnlStatus::EnlOk);
        let mut r = ptr::null_mut();
        assert_eq!(unsafe { enl_scenario_run(s, &mut r) }, EnlStatus::EnlOk);
        assert_eq!(unsafe { enl_report_passed(r) }, 1);
        assert_eq!(unsafe { enl_report_check_count(r) }, 2);
        let json = take(unsafe { enl_report_json(r) });
        assert_eq!(Report::from_json(&json).unwrap().scenario, "never");
        assert!(take(unsafe { enl_report_text(r) }).starts_with("scenario never"));
        unsafe {
            enl_report_free(r);
            enl_scenario_free(s);
        }
    }

    #[test]
    fn failing_checks_still_produce_a_report() {
        let path = c(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/scenarios/mutation-sign-flip.toml"));
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { enl_scenario_load(path.as_ptr(), &mut s) }, EnlStatus::EnlOk);
        let mut r = ptr::null_mut();
        assert_eq!(unsafe { enl_scenario_run(s, &mut r) }, EnlStatus::EnlCheckFailed);
        assert_eq!(unsafe { enl_report_passed(r) }, 0);
        unsafe {
            enl_report_free(r);
            enl_scenario_free(s);
        }
    }

    #[test]
    fn errors_are_reported() {
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { enl_scenario_parse(ptr::null(), &mut s) }, EnlStatus::EnlNullArgument);
        assert_eq!(unsafe { enl_scenario_parse(c("name = 3").as_ptr(), &mut s) }, EnlStatus::EnlParseError);
        assert!(!last_error().is_empty());
        assert!(s.is_null());
        let missing = c("/nonexistent/scenario.toml");
        assert_eq!(unsafe { enl_scenario_load(missing.as_ptr(), &mut s) }, EnlStatus::EnlParseError);
        assert_eq!(unsafe { enl_scenario_run(ptr::null(), &mut ptr::null_mut()) }, EnlStatus::EnlNullArgument);
        assert_eq!(unsafe { enl_report_passed(ptr::null()) }, -1);
        assert!(unsafe { enl_report_json(ptr::null()) }.is_null());
        unsafe {
            enl_scenario_free(ptr::null_mut());
            enl_report_free(ptr::null_mut());
            enl_string_free(ptr::null_mut());
        }
    }

    #[test]
    fn overrides_apply_and_validate() {
        let path = c(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/scenarios/mc-cox-small.toml"));
        let mut s = ptr::null_mut();
        assert_eq!(unsafe { enl_scenario_load(path.as_ptr(), &mut s) }, EnlStatus::EnlOk);
        assert_eq!(unsafe { enl_scenario_set_seed(s, 3) }, EnlStatus::EnlOk);
        assert_eq!(unsafe { enl_scenario_set_paths(s, 500) }, EnlStatus::EnlOk);
        assert_eq!(unsafe { enl_scenario_set_paths(s, 0) }, EnlStatus::EnlParseError);
        let inner = unsafe { &(*s).inner };
        assert_eq!(inner.mc.as_ref().unwrap().paths, 500);
        assert_eq!(inner.mc.as_ref().unwrap().seed, 3);
        unsafe { enl_scenario_free(s) };
    }

    #[test]
    fn version_is_a_c_string() {
        let v = unsafe { CStr::from_ptr(enl_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
