//! C ABI over the simulator: opaque configuration and result handles, status
//! codes, and a per-thread last-error message.
//!
//! Every function returning [`FdbfStatus`] leaves its out-parameters untouched
//! on failure. Strings handed out by the library must be released with
//! [`fdbf_string_free`]; handles with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fdbf_core::harness::config::{parse_config, to_toml, DesignSpec, Preset, ScenarioConfig};
use fdbf_core::harness::emit::{to_csv, to_json};
use fdbf_core::harness::{run_sweep, SweepResult};
use fdbf_core::metrics::{energy_efficiency, total_power_mw, Architecture, PowerModel};
use fdbf_core::{Error, ErrorCategory};

/// Status codes; nonzero values match the CLI exit codes where both exist.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdbfStatus {
    Ok = 0,
    Numeric = 2,
    Dimension = 3,
    Argument = 4,
    Config = 5,
    Io = 6,
    Format = 7,
    NullPointer = 8,
    InvalidUtf8 = 9,
    OutOfRange = 10,
    Panic = 11,
}

impl From<ErrorCategory> for FdbfStatus {
    fn from(c: ErrorCategory) -> Self {
        match c {
            ErrorCategory::Numeric => FdbfStatus::Numeric,
            ErrorCategory::Dimension => FdbfStatus::Dimension,
            ErrorCategory::Argument => FdbfStatus::Argument,
            ErrorCategory::Config => FdbfStatus::Config,
            ErrorCategory::Io => FdbfStatus::Io,
            ErrorCategory::Format => FdbfStatus::Format,
        }
    }
}

/// Receiver architecture for the power model.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdbfArchitecture {
    FullDigital = 0,
    Hybrid = 1,
}

/// Opaque scenario configuration.
pub struct FdbfConfig(ScenarioConfig);

/// Opaque sweep result.
pub struct FdbfResult(SweepResult);

/// Aggregates of one (axis value, variant, design) row.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FdbfRowSummary {
    pub axis_value: f64,
    pub se_up_mean: f64,
    pub se_down_mean: f64,
    pub se_sum_mean: f64,
    pub se_up_p10: f64,
    pub se_down_p10: f64,
    pub ee_bits_per_joule_hz: f64,
    /// NaN when the design has no residual SI (upper bound).
    pub resid_si_db_mean: f64,
    pub trials: u64,
    pub failures: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("interior NULs removed"));
}

enum Failure {
    Core(Error),
    Status(FdbfStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FdbfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            FdbfStatus::Ok
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(format!("{}: {e}", e.category().as_str()));
            e.category().into()
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_last_error(msg);
            s
        }
        Err(_) => {
            set_last_error("internal panic");
            FdbfStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(FdbfStatus::NullPointer, format!("{what} is NULL"))
}

/// # Safety
/// `p` must be NULL or a valid NUL-terminated string.
unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| Failure::Status(FdbfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

/// Message describing the last failure on this thread; empty after a success.
/// The pointer stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn fdbf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fdbf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a flat TOML scenario. `toml_text` may be NULL for an empty document;
/// `preset` may be NULL to use the one named in the text (default mmwave).
///
/// # Safety
/// Non-NULL string arguments must be valid NUL-terminated strings and `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdbf_config_parse(
    toml_text: *const c_char,
    preset: *const c_char,
    out: *mut *mut FdbfConfig,
) -> FdbfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = opt_str(toml_text, "toml_text")?.unwrap_or("");
        let preset = opt_str(preset, "preset")?;
        let cfg = parse_config(text, preset)?;
        cfg.validate()?;
        *out = Box::into_raw(Box::new(FdbfConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or a handle from [`fdbf_config_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fdbf_config_free(cfg: *mut FdbfConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn fdbf_config_set_seed(cfg: *mut FdbfConfig, seed: u64) -> FdbfStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        cfg.0.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn fdbf_config_set_trials(cfg: *mut FdbfConfig, trials: u64) -> FdbfStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let mut next = cfg.0.clone();
        next.trials = usize::try_from(trials)
            .map_err(|_| Failure::Status(FdbfStatus::OutOfRange, format!("{trials} trials")))?;
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// Resolved configuration as TOML; release with [`fdbf_string_free`].
///
/// # Safety
/// `cfg` must be a live configuration handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdbf_config_to_toml(cfg: *const FdbfConfig, out: *mut *mut c_char) -> FdbfStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(to_toml(&cfg.0)?);
        Ok(())
    })
}

/// Runs the full sweep described by `cfg`.
///
/// # Safety
/// `cfg` must be a live configuration handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdbf_run(cfg: *const FdbfConfig, out: *mut *mut FdbfResult) -> FdbfStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let res = run_sweep(&cfg.0)?;
        *out = Box::into_raw(Box::new(FdbfResult(res)));
        Ok(())
    })
}

/// # Safety
/// `res` must be NULL or a handle from [`fdbf_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fdbf_result_free(res: *mut FdbfResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Number of rows, or 0 for a NULL handle.
///
/// # Safety
/// `res` must be NULL or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn fdbf_result_row_count(res: *const FdbfResult) -> u64 {
    res.as_ref().map_or(0, |r| r.0.rows.len() as u64)
}

/// # Safety
/// `res` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdbf_result_row(res: *const FdbfResult, index: u64, out: *mut FdbfRowSummary) -> FdbfStatus {
    guard(|| {
        let res = res.as_ref().ok_or_else(|| null("res"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let row = usize::try_from(index).ok().and_then(|i| res.0.rows.get(i)).ok_or_else(|| {
            Failure::Status(FdbfStatus::OutOfRange, format!("row {index} of {}", res.0.rows.len()))
        })?;
        let s = &row.summary;
        *out = FdbfRowSummary {
            axis_value: row.axis_value,
            se_up_mean: s.se_up_mean,
            se_down_mean: s.se_down_mean,
            se_sum_mean: s.se_sum_mean,
            se_up_p10: s.se_up_p10,
            se_down_p10: s.se_down_p10,
            ee_bits_per_joule_hz: s.ee_bits_per_joule_hz,
            resid_si_db_mean: s.resid_si_db_mean.unwrap_or(f64::NAN),
            trials: s.trials as u64,
            failures: s.failures as u64,
        };
        Ok(())
    })
}

/// Design label of a row, e.g. `hybrid:50`; release with [`fdbf_string_free`].
///
/// # Safety
/// `res` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdbf_result_row_design(res: *const FdbfResult, index: u64, out: *mut *mut c_char) -> FdbfStatus {
    guard(|| {
        let res = res.as_ref().ok_or_else(|| null("res"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let row = usize::try_from(index).ok().and_then(|i| res.0.rows.get(i)).ok_or_else(|| {
            Failure::Status(FdbfStatus::OutOfRange, format!("row {index} of {}", res.0.rows.len()))
        })?;
        let design: DesignSpec = row.design;
        let label = match row.variant {
            Some(v) => format!("{design}@{}", Preset::name(v)),
            None => design.to_string(),
        };
        *out = into_c_string(label);
        Ok(())
    })
}

/// CSV rendering identical to the CLI output; release with [`fdbf_string_free`].
///
/// # Safety
/// `res` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdbf_result_to_csv(res: *const FdbfResult, out: *mut *mut c_char) -> FdbfStatus {
    guard(|| {
        let res = res.as_ref().ok_or_else(|| null("res"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(to_csv(&res.0)?);
        Ok(())
    })
}

/// JSON rendering; `full` keeps per-trial records. Release with [`fdbf_string_free`].
///
/// # Safety
/// `res` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdbf_result_to_json(res: *const FdbfResult, full: bool, out: *mut *mut c_char) -> FdbfStatus {
    guard(|| {
        let res = res.as_ref().ok_or_else(|| null("res"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(to_json(&res.0, full)?);
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fdbf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn power_model(p_adc_mw: f64) -> Result<PowerModel, Failure> {
    let pm = PowerModel::with_adc(p_adc_mw);
    pm.validate()?;
    Ok(pm)
}

fn arch(a: FdbfArchitecture) -> Architecture {
    match a {
        FdbfArchitecture::FullDigital => Architecture::FullDigital,
        FdbfArchitecture::Hybrid => Architecture::Hybrid,
    }
}

/// Receive-side power in mW with the default device powers and the given ADC power.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdbf_total_power_mw(
    architecture: FdbfArchitecture,
    n_rx: u32,
    n_rf: u32,
    p_adc_mw: f64,
    out: *mut f64,
) -> FdbfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = total_power_mw(arch(architecture), n_rx as usize, n_rf as usize, &power_model(p_adc_mw)?);
        Ok(())
    })
}

/// Energy efficiency in bits/s/Hz/W for spectral efficiency `se`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fdbf_energy_efficiency(
    se: f64,
    architecture: FdbfArchitecture,
    n_rx: u32,
    n_rf: u32,
    p_adc_mw: f64,
    out: *mut f64,
) -> FdbfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(se.is_finite() && se >= 0.0) {
            return Err(Failure::Status(FdbfStatus::Argument, format!("se = {se}")));
        }
        *out = energy_efficiency(se, arch(architecture), n_rx as usize, n_rf as usize, &power_model(p_adc_mw)?);
        Ok(())
    })
}
