//! C ABI for the isac-channel simulator.
//!
//! Scenario configs and drop results travel as opaque handles; every entry
//! point returns a status code and the last error message is retrievable per
//! thread. Tensor data copies out as interleaved re/im doubles in the same
//! row-major (rx_element, tx_element, path, time_sample) order the binary
//! export uses.
//!
//! Ownership: handles returned through out-pointers belong to the caller and
//! must be released with the matching `_free` function. Strings returned by
//! `isac_last_error_message` and `isac_version` are borrowed and valid until
//! the next FFI call on the same thread.

// Callers come through the C ABI; pointer validity is the documented
// contract and every entry point null-checks before dereferencing.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use isac_channel::cir::CirTensor;
use isac_channel::error::Error;
use isac_channel::harness::{
    export_campaign, export_drops, run_campaign, run_drop, DropResult, ExportFormat,
    ScenarioConfig,
};
use isac_channel::stochastic::ScenarioTables;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsacStatus {
    Ok = 0,
    /// Invalid configuration or arguments (mirrors CLI exit code 2).
    ConfigError = 2,
    /// Model or I/O failure (mirrors CLI exit code 3).
    RuntimeError = 3,
    /// A required pointer argument was null.
    NullArgument = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// A caller-provided buffer was too small.
    BufferTooSmall = 6,
    /// An internal panic was caught at the boundary.
    InternalPanic = 7,
}

/// Which CIR tensor of a drop result to query.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsacTensorKind {
    CommTotal = 0,
    CommShared = 1,
    CommNonShared = 2,
    SensingTotal = 3,
    SensingShared = 4,
    SensingNonShared = 5,
}

/// Opaque scenario handle: parsed config plus its parameter tables.
pub struct IsacScenario {
    config: ScenarioConfig,
    tables: ScenarioTables,
}

/// Opaque drop result handle.
pub struct IsacDropResult {
    inner: DropResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> =
        RefCell::new(CString::new("").expect("empty C string"));
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("sanitized C string");
    });
}

fn status_from_error(err: &Error) -> IsacStatus {
    match err {
        Error::Config(_) => IsacStatus::ConfigError,
        _ => IsacStatus::RuntimeError,
    }
}

fn fail(err: &Error) -> c_int {
    set_last_error(&err.to_string());
    status_from_error(err) as c_int
}

fn guard(f: impl FnOnce() -> c_int) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_last_error("internal panic at the FFI boundary");
            IsacStatus::InternalPanic as c_int
        }
    }
}

fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        set_last_error("null string argument");
        return Err(IsacStatus::NullArgument as c_int);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_last_error("string argument is not valid UTF-8");
        IsacStatus::InvalidUtf8 as c_int
    })
}

macro_rules! nonnull {
    ($ptr:expr) => {
        if $ptr.is_null() {
            set_last_error(concat!("null pointer argument: ", stringify!($ptr)));
            return IsacStatus::NullArgument as c_int;
        }
    };
}

/// Last error message for the current thread, empty when no error occurred.
#[no_mangle]
pub extern "C" fn isac_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version string.
#[no_mangle]
pub extern "C" fn isac_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

fn build_scenario(config: ScenarioConfig) -> Result<Box<IsacScenario>, Error> {
    let tables = config.tables()?;
    Ok(Box::new(IsacScenario { config, tables }))
}

/// Parses a scenario from TOML text.
#[no_mangle]
pub extern "C" fn isac_scenario_from_toml(
    text: *const c_char,
    out: *mut *mut IsacScenario,
) -> c_int {
    guard(|| {
        nonnull!(out);
        let text = match utf8_arg(text) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match ScenarioConfig::from_toml_str(text).and_then(build_scenario) {
            Ok(scenario) => {
                unsafe { *out = Box::into_raw(scenario) };
                IsacStatus::Ok as c_int
            }
            Err(err) => fail(&err),
        }
    })
}

/// Loads a scenario from a TOML config file.
#[no_mangle]
pub extern "C" fn isac_scenario_from_file(
    path: *const c_char,
    out: *mut *mut IsacScenario,
) -> c_int {
    guard(|| {
        nonnull!(out);
        let path = match utf8_arg(path) {
            Ok(p) => p,
            Err(code) => return code,
        };
        match ScenarioConfig::from_file(Path::new(path)).and_then(build_scenario) {
            Ok(scenario) => {
                unsafe { *out = Box::into_raw(scenario) };
                IsacStatus::Ok as c_int
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases a scenario handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn isac_scenario_free(scenario: *mut IsacScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

/// Overrides the scenario's root seed.
#[no_mangle]
pub extern "C" fn isac_scenario_set_seed(scenario: *mut IsacScenario, seed: u64) -> c_int {
    guard(|| {
        nonnull!(scenario);
        unsafe { &mut *scenario }.config.root_seed = seed;
        IsacStatus::Ok as c_int
    })
}

/// Number of configured sensing targets.
#[no_mangle]
pub extern "C" fn isac_scenario_target_count(
    scenario: *const IsacScenario,
    out: *mut usize,
) -> c_int {
    guard(|| {
        nonnull!(scenario);
        nonnull!(out);
        unsafe { *out = (*scenario).config.targets.len() };
        IsacStatus::Ok as c_int
    })
}

/// Runs one drop of the scenario.
#[no_mangle]
pub extern "C" fn isac_run_drop(
    scenario: *const IsacScenario,
    drop_id: u64,
    out: *mut *mut IsacDropResult,
) -> c_int {
    guard(|| {
        nonnull!(scenario);
        nonnull!(out);
        let scenario = unsafe { &*scenario };
        match run_drop(&scenario.config, &scenario.tables, drop_id) {
            Ok(result) => {
                unsafe { *out = Box::into_raw(Box::new(IsacDropResult { inner: result })) };
                IsacStatus::Ok as c_int
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases a drop result handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn isac_drop_free(result: *mut IsacDropResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Communication and sensing sharing degrees of a drop.
#[no_mangle]
pub extern "C" fn isac_drop_sharing_degrees(
    result: *const IsacDropResult,
    sd_c: *mut f64,
    sd_s: *mut f64,
) -> c_int {
    guard(|| {
        nonnull!(result);
        nonnull!(sd_c);
        nonnull!(sd_s);
        let r = unsafe { &*result };
        unsafe {
            *sd_c = r.inner.sd_c;
            *sd_s = r.inner.sd_s;
        }
        IsacStatus::Ok as c_int
    })
}

/// Number of sensing cascade paths in a drop.
#[no_mangle]
pub extern "C" fn isac_drop_sensing_path_count(
    result: *const IsacDropResult,
    out: *mut usize,
) -> c_int {
    guard(|| {
        nonnull!(result);
        nonnull!(out);
        unsafe { *out = (*result).inner.sensing_paths.len() };
        IsacStatus::Ok as c_int
    })
}

/// Copies sensing path geometry into caller-provided arrays. Any output
/// array may be null to skip that column; non-null arrays must hold at least
/// `len` elements, and `len` must be at least the path count.
#[no_mangle]
pub extern "C" fn isac_drop_sensing_paths(
    result: *const IsacDropResult,
    aod_deg: *mut f64,
    zod_deg: *mut f64,
    delay_s: *mut f64,
    power: *mut f64,
    shared: *mut u8,
    len: usize,
) -> c_int {
    guard(|| {
        nonnull!(result);
        let paths = &unsafe { &*result }.inner.sensing_paths;
        if len < paths.len() {
            set_last_error("sensing path buffer too small");
            return IsacStatus::BufferTooSmall as c_int;
        }
        for (i, p) in paths.iter().enumerate() {
            unsafe {
                if !aod_deg.is_null() {
                    *aod_deg.add(i) = p.aod_deg;
                }
                if !zod_deg.is_null() {
                    *zod_deg.add(i) = p.zod_deg;
                }
                if !delay_s.is_null() {
                    *delay_s.add(i) = p.delay_s;
                }
                if !power.is_null() {
                    *power.add(i) = p.power;
                }
                if !shared.is_null() {
                    *shared.add(i) = u8::from(p.shared);
                }
            }
        }
        IsacStatus::Ok as c_int
    })
}

fn tensor_of(result: &IsacDropResult, kind: IsacTensorKind) -> &CirTensor {
    match kind {
        IsacTensorKind::CommTotal => &result.inner.comm_total,
        IsacTensorKind::CommShared => &result.inner.comm_shared,
        IsacTensorKind::CommNonShared => &result.inner.comm_non_shared,
        IsacTensorKind::SensingTotal => &result.inner.sensing_total,
        IsacTensorKind::SensingShared => &result.inner.sensing_shared,
        IsacTensorKind::SensingNonShared => &result.inner.sensing_non_shared,
    }
}

/// Dimensions of one CIR tensor: rx_elements, tx_elements, paths,
/// time_samples.
#[no_mangle]
pub extern "C" fn isac_drop_cir_dims(
    result: *const IsacDropResult,
    kind: IsacTensorKind,
    dims: *mut usize,
) -> c_int {
    guard(|| {
        nonnull!(result);
        nonnull!(dims);
        let t = tensor_of(unsafe { &*result }, kind);
        let (rx, tx, paths, times) = t.dims();
        unsafe {
            *dims.add(0) = rx;
            *dims.add(1) = tx;
            *dims.add(2) = paths;
            *dims.add(3) = times;
        }
        IsacStatus::Ok as c_int
    })
}

/// Copies one CIR tensor as interleaved re/im doubles, row-major in
/// (rx_element, tx_element, path, time_sample) order. `len` counts doubles
/// and must be at least 2 * rx * tx * paths * times.
#[no_mangle]
pub extern "C" fn isac_drop_cir_copy(
    result: *const IsacDropResult,
    kind: IsacTensorKind,
    out: *mut f64,
    len: usize,
) -> c_int {
    guard(|| {
        nonnull!(result);
        nonnull!(out);
        let t = tensor_of(unsafe { &*result }, kind);
        let needed = 2 * t.coefficients.len();
        if len < needed {
            set_last_error("CIR buffer too small");
            return IsacStatus::BufferTooSmall as c_int;
        }
        for (i, c) in t.coefficients.iter().enumerate() {
            unsafe {
                *out.add(2 * i) = c.re;
                *out.add(2 * i + 1) = c.im;
            }
        }
        IsacStatus::Ok as c_int
    })
}

/// Per-path delays of one CIR tensor, seconds. `len` must be at least the
/// path count.
#[no_mangle]
pub extern "C" fn isac_drop_cir_delays(
    result: *const IsacDropResult,
    kind: IsacTensorKind,
    out: *mut f64,
    len: usize,
) -> c_int {
    guard(|| {
        nonnull!(result);
        nonnull!(out);
        let t = tensor_of(unsafe { &*result }, kind);
        if len < t.path_delays.len() {
            set_last_error("delay buffer too small");
            return IsacStatus::BufferTooSmall as c_int;
        }
        for (i, d) in t.path_delays.iter().enumerate() {
            unsafe { *out.add(i) = *d };
        }
        IsacStatus::Ok as c_int
    })
}

/// Exports one drop (JSON record, paths CSV, CIR binaries with sidecars)
/// into a directory.
#[no_mangle]
pub extern "C" fn isac_drop_export(
    result: *const IsacDropResult,
    out_dir: *const c_char,
) -> c_int {
    guard(|| {
        nonnull!(result);
        let dir = match utf8_arg(out_dir) {
            Ok(d) => d,
            Err(code) => return code,
        };
        let r = unsafe { &*result };
        match export_drops(
            std::slice::from_ref(&r.inner),
            ExportFormat::All,
            &PathBuf::from(dir),
        ) {
            Ok(_) => IsacStatus::Ok as c_int,
            Err(err) => fail(&err),
        }
    })
}

/// Runs a sweep campaign over the given shared-cluster counts and writes the
/// CDF and summary tables into a directory.
#[no_mangle]
pub extern "C" fn isac_run_campaign_to_dir(
    scenario: *const IsacScenario,
    counts: *const usize,
    n_counts: usize,
    out_dir: *const c_char,
) -> c_int {
    guard(|| {
        nonnull!(scenario);
        nonnull!(counts);
        let dir = match utf8_arg(out_dir) {
            Ok(d) => d,
            Err(code) => return code,
        };
        let scenario = unsafe { &*scenario };
        let counts = unsafe { std::slice::from_raw_parts(counts, n_counts) };
        let outcome = run_campaign(&scenario.config, &scenario.tables, counts).and_then(
            |campaign| export_campaign(&campaign, ExportFormat::All, &PathBuf::from(dir)),
        );
        match outcome {
            Ok(_) => IsacStatus::Ok as c_int,
            Err(err) => fail(&err),
        }
    })
}
