//! C ABI for the ncsense estimation pipeline.
//!
//! The surface is deliberately small: an opaque configuration handle, one
//! estimation entry point that fills a plain struct, and a per-thread error
//! message for diagnostics. Every function returns an [`NcsenseStatus`] (or
//! null for constructors) instead of unwinding; panics from the underlying
//! library are caught at the boundary.
//!
//! Strings are NUL-terminated UTF-8. Pointers returned by constructors own
//! their object and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::str::FromStr;

use ncsense::config::{load_config, SimulationConfig, ValidationOutcome};
use ncsense::estimators::Method;
use ncsense::runner::{run_estimate, LambdaSource, Scenario};
use ncsense::Error;

/// Result code returned by every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcsenseStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// Configuration is invalid or could not be parsed.
    Config = 3,
    /// Occupancy mask construction or parsing failed.
    Mask = 4,
    /// Operand dimensions do not line up.
    Shape = 5,
    /// Nothing usable to estimate from.
    NoData = 6,
    /// The solver could not run or produced non-finite values.
    Solver = 7,
    /// Sparsity-weight selection failed.
    Tuning = 8,
    /// An argument was out of range or unparseable.
    InvalidArgument = 9,
    /// File system failure.
    Io = 10,
    /// The library panicked internally; state is still consistent.
    Panic = 11,
}

/// Opaque simulation configuration handle.
pub struct NcsenseConfig(SimulationConfig);

/// Output of a single estimation run.
///
/// Contents are meaningful only when the producing call returned
/// `NcsenseStatus_Ok`. Sparsity weights are NaN for methods that do not use
/// them.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NcsenseEstimate {
    /// Estimated target range in meters.
    pub range_m: f64,
    /// Estimated radial velocity in meters per second.
    pub velocity_mps: f64,
    /// 1-based peak bin on the range axis.
    pub range_peak_bin: u64,
    /// 1-based peak bin on the velocity axis.
    pub velocity_peak_bin: u64,
    /// Peak-to-sidelobe ratio of the range spectrum in dB; +inf when the
    /// spectrum is a clean impulse.
    pub range_psr_db: f64,
    /// Peak-to-sidelobe ratio of the velocity spectrum in dB.
    pub velocity_psr_db: f64,
    /// Sparsity weight applied on the range axis, NaN when not applicable.
    pub lambda_range: f64,
    /// Sparsity weight applied on the velocity axis, NaN when not applicable.
    pub lambda_velocity: f64,
    /// Total solver iterations across all per-column range solves.
    pub range_solver_iters: u64,
    /// Total solver iterations across all per-row velocity solves.
    pub velocity_solver_iters: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::default());
}

fn status_of(err: &Error) -> NcsenseStatus {
    match err {
        Error::Config(_) => NcsenseStatus::Config,
        Error::Mask(_) => NcsenseStatus::Mask,
        Error::Shape(_) => NcsenseStatus::Shape,
        Error::NoData(_) => NcsenseStatus::NoData,
        Error::Solver(_) => NcsenseStatus::Solver,
        Error::Tuning(_) => NcsenseStatus::Tuning,
        Error::InvalidArgument(_) => NcsenseStatus::InvalidArgument,
        Error::Io(_) => NcsenseStatus::Io,
    }
}

fn fail(err: &Error) -> NcsenseStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Runs `f` with panics converted to `NcsenseStatus::Panic`.
fn guarded(f: impl FnOnce() -> NcsenseStatus) -> NcsenseStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            NcsenseStatus::Panic
        }
    }
}

/// SAFETY: `ptr` must be null or a valid NUL-terminated string pointer.
unsafe fn utf8_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, NcsenseStatus> {
    if ptr.is_null() {
        set_error(&format!("{name} must not be null"));
        return Err(NcsenseStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error(&format!("{name} is not valid UTF-8"));
        NcsenseStatus::Utf8
    })
}

/// Library version as a static NUL-terminated string. Never null.
#[no_mangle]
pub extern "C" fn ncsense_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on the calling thread, as a
/// NUL-terminated string. Empty when the last call succeeded. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn ncsense_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Allocates a configuration populated with the library defaults. Never
/// fails. Release with `ncsense_config_free`.
#[no_mangle]
pub extern "C" fn ncsense_config_default() -> *mut NcsenseConfig {
    clear_error();
    Box::into_raw(Box::new(NcsenseConfig(SimulationConfig::default())))
}

/// Loads a configuration from a `key = value` text file. Returns null on
/// failure and records the reason for `ncsense_last_error_message`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string pointer.
#[no_mangle]
pub unsafe extern "C" fn ncsense_config_load(path: *const c_char) -> *mut NcsenseConfig {
    clear_error();
    let path = match unsafe { utf8_arg(path, "path") } {
        Ok(p) => p,
        Err(_) => return std::ptr::null_mut(),
    };
    match catch_unwind(|| load_config(Path::new(path))) {
        Ok(Ok(cfg)) => Box::into_raw(Box::new(NcsenseConfig(cfg))),
        Ok(Err(e)) => {
            fail(&e);
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic");
            std::ptr::null_mut()
        }
    }
}

/// Sets one configuration field by its text key, e.g.
/// `ncsense_config_set(cfg, "n_subcarriers", "256")`. Unknown keys and
/// unparseable values are rejected without modifying the configuration.
///
/// # Safety
/// `cfg` must come from a constructor of this library and not have been
/// freed; `key` and `value` must be valid NUL-terminated string pointers.
#[no_mangle]
pub unsafe extern "C" fn ncsense_config_set(
    cfg: *mut NcsenseConfig,
    key: *const c_char,
    value: *const c_char,
) -> NcsenseStatus {
    clear_error();
    if cfg.is_null() {
        set_error("cfg must not be null");
        return NcsenseStatus::NullArgument;
    }
    let key = match unsafe { utf8_arg(key, "key") } {
        Ok(k) => k,
        Err(s) => return s,
    };
    let value = match unsafe { utf8_arg(value, "value") } {
        Ok(v) => v,
        Err(s) => return s,
    };
    let cfg = unsafe { &mut *cfg };
    guarded(|| match cfg.0.set_key(key, value) {
        Ok(()) => NcsenseStatus::Ok,
        Err(e) => fail(&e),
    })
}

/// Checks every configuration invariant. Returns `Ok` when the configuration
/// is usable; otherwise returns `Config` and stores the full list of
/// violations in the thread error message.
///
/// # Safety
/// `cfg` must come from a constructor of this library and not have been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ncsense_config_validate(cfg: *const NcsenseConfig) -> NcsenseStatus {
    clear_error();
    if cfg.is_null() {
        set_error("cfg must not be null");
        return NcsenseStatus::NullArgument;
    }
    let cfg = unsafe { &*cfg };
    guarded(|| match cfg.0.validate() {
        ValidationOutcome::Ok => NcsenseStatus::Ok,
        ValidationOutcome::Violations(v) => {
            set_error(&v.join("; "));
            NcsenseStatus::Config
        }
    })
}

/// Releases a configuration handle. Null is accepted and ignored.
///
/// # Safety
/// `cfg` must be null or an unfreed pointer from a constructor of this
/// library; it must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ncsense_config_free(cfg: *mut NcsenseConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Runs one end-to-end estimation and fills `out`.
///
/// `scenario` is `"s1"`, `"s2"`, or `"file:PATH"` pointing at an occupancy
/// mask CSV. `method` is `"jcmsa"`, `"masked-2dfft"`, or `"plain-2dfft"`.
/// `lambda_source` is a non-negative number, `"table"`, or `"tune"`; it only
/// affects the sparse method. `seed` selects the noise realization.
///
/// # Safety
/// `cfg` must come from a constructor of this library and not have been
/// freed; `scenario`, `method`, and `lambda_source` must be valid
/// NUL-terminated string pointers; `out` must point to writable memory for
/// one `NcsenseEstimate`.
#[no_mangle]
pub unsafe extern "C" fn ncsense_estimate(
    cfg: *const NcsenseConfig,
    scenario: *const c_char,
    snr_db: f64,
    method: *const c_char,
    lambda_source: *const c_char,
    seed: u64,
    out: *mut NcsenseEstimate,
) -> NcsenseStatus {
    clear_error();
    if cfg.is_null() || out.is_null() {
        set_error("cfg and out must not be null");
        return NcsenseStatus::NullArgument;
    }
    let scenario = match unsafe { utf8_arg(scenario, "scenario") } {
        Ok(s) => s,
        Err(s) => return s,
    };
    let method = match unsafe { utf8_arg(method, "method") } {
        Ok(m) => m,
        Err(s) => return s,
    };
    let lambda_source = match unsafe { utf8_arg(lambda_source, "lambda_source") } {
        Ok(l) => l,
        Err(s) => return s,
    };
    let cfg = unsafe { &*cfg };
    let out = unsafe { &mut *out };
    guarded(|| {
        let scenario = match Scenario::from_str(scenario) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
        let method = match Method::parse(method) {
            Ok(m) => m,
            Err(e) => return fail(&e),
        };
        let lambda_source = match LambdaSource::from_str(lambda_source) {
            Ok(l) => l,
            Err(e) => return fail(&e),
        };
        match run_estimate(&cfg.0, &scenario, snr_db, method, &lambda_source, seed) {
            Ok(o) => {
                *out = NcsenseEstimate {
                    range_m: o.range.estimate,
                    velocity_mps: o.velocity.estimate,
                    range_peak_bin: o.range.peak_bin as u64,
                    velocity_peak_bin: o.velocity.peak_bin as u64,
                    range_psr_db: o.range.psr_db,
                    velocity_psr_db: o.velocity.psr_db,
                    lambda_range: o.lambda_range.unwrap_or(f64::NAN),
                    lambda_velocity: o.lambda_velocity.unwrap_or(f64::NAN),
                    range_solver_iters: o.range.solver_iters_total as u64,
                    velocity_solver_iters: o.velocity.solver_iters_total as u64,
                };
                NcsenseStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
