//! C interface to `talbot-core`.
//!
//! Every fallible function returns a [`TalbotStatus`] and writes its result
//! through an out-pointer. On failure the message is available from
//! [`talbot_last_error`] on the same thread until the next failing call.
//! Objects are opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use talbot_core::config::{parse_config_with, RunConfig};
use talbot_core::engine::{self, FringeHarmonics, KdtliParameters, VisibilityMode};
use talbot_core::scan::fit_counts;
use talbot_core::sweep;
use talbot_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TalbotStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Syntax = 4,
    Config = 5,
    UnknownMolecule = 6,
    MissingPolarizability = 7,
    Truncation = 8,
    Convergence = 9,
    Fit = 10,
    Io = 11,
    Format = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TalbotVisibilityMode {
    Sinusoidal = 0,
    MinMax = 1,
}

/// Result of a sinusoidal fit; see `talbot_fit_counts`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TalbotFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub visibility: f64,
    pub sigma_visibility: f64,
    pub reduced_chi_square: f64,
}

/// A validated run configuration.
pub struct TalbotConfig {
    inner: RunConfig,
}

/// Fourier components of a detected fringe signal.
pub struct TalbotHarmonics {
    inner: FringeHarmonics,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Utf8(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn status_of(e: &Error) -> TalbotStatus {
    match e {
        Error::Domain(_) => TalbotStatus::Domain,
        Error::UnknownMolecule { .. } => TalbotStatus::UnknownMolecule,
        Error::MissingPolarizability { .. } => TalbotStatus::MissingPolarizability,
        Error::Truncation(_) => TalbotStatus::Truncation,
        Error::Convergence(_) => TalbotStatus::Convergence,
        Error::Syntax { .. } => TalbotStatus::Syntax,
        Error::Config { .. } => TalbotStatus::Config,
        Error::Fit(_) => TalbotStatus::Fit,
        Error::Io { .. } => TalbotStatus::Io,
        Error::Format { .. } => TalbotStatus::Format,
    }
}

fn record(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TalbotStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TalbotStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            record(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            record(format!("null pointer passed as `{what}`"));
            TalbotStatus::NullPointer
        }
        Ok(Err(Failure::Utf8(what))) => {
            record(format!("`{what}` is not valid UTF-8"));
            TalbotStatus::InvalidUtf8
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            record(format!("internal panic: {msg}"));
            TalbotStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(what))
}

unsafe fn object<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn talbot_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn talbot_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses configuration text into a new handle.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_config_parse(text: *const c_char, out: *mut *mut TalbotConfig) -> TalbotStatus {
    guard(|| {
        let inner = parse_config_with(self::text(text, "text")?, &[], None)?;
        write(out, Box::into_raw(Box::new(TalbotConfig { inner })), "out")
    })
}

/// Applies one `section.key=value` override in place. The handle is left
/// unchanged on failure.
///
/// # Safety
/// `config` must come from `talbot_config_parse`; `assignment` must be
/// NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn talbot_config_set(config: *mut TalbotConfig, assignment: *const c_char) -> TalbotStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or(Failure::Null("config"))?;
        let assignment = text(assignment, "assignment")?.to_string();
        let rendered = cfg.inner.to_document().render();
        cfg.inner = parse_config_with(&rendered, &[assignment], None)?;
        Ok(())
    })
}

/// # Safety
/// `config` must come from `talbot_config_parse` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn talbot_config_free(config: *mut TalbotConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Imprinted phase at `speed` for the configured molecule and laser.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_phi_max(config: *const TalbotConfig, speed: f64, out: *mut f64) -> TalbotStatus {
    guard(|| {
        let c = &object(config, "config")?.inner;
        let v = engine::phi_max_with(&c.molecule, &c.laser, speed, c.options.prefactors)?;
        write(out, v, "out")
    })
}

/// Mean number of absorbed photons at `speed`.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_mean_absorbed_photons(
    config: *const TalbotConfig,
    speed: f64,
    out: *mut f64,
) -> TalbotStatus {
    guard(|| {
        let c = &object(config, "config")?.inner;
        let v = engine::mean_absorbed_photons_with(&c.molecule, &c.laser, speed, c.options.prefactors)?;
        write(out, v, "out")
    })
}

/// Closed-form standing-wave visibility at `zeta = L/L_T`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_visibility_closed_form(
    phi_max: f64,
    n0: f64,
    zeta: f64,
    open_fraction: f64,
    out: *mut f64,
) -> TalbotStatus {
    guard(|| {
        let p = KdtliParameters::at_ratio(phi_max, n0, zeta, open_fraction)?;
        write(out, engine::visibility_closed_form(&p)?, "out")
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_mismatch_factor(
    delta_period: f64,
    illuminated_width: f64,
    period: f64,
    out: *mut f64,
) -> TalbotStatus {
    guard(|| {
        let v = engine::period_mismatch_factor(delta_period, illuminated_width, period)?;
        write(out, v, "out")
    })
}

/// Velocity-averaged harmonics of the configured arrangement.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_averaged_harmonics(
    config: *const TalbotConfig,
    out: *mut *mut TalbotHarmonics,
) -> TalbotStatus {
    guard(|| {
        let c = &object(config, "config")?.inner;
        let inner = sweep::averaged_harmonics(c, &c.geometry(c.arrangement)?, &c.velocity)?;
        write(out, Box::into_raw(Box::new(TalbotHarmonics { inner })), "out")
    })
}

/// Highest harmonic order held.
///
/// # Safety
/// `harmonics` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_harmonics_s_max(harmonics: *const TalbotHarmonics, out: *mut usize) -> TalbotStatus {
    guard(|| write(out, object(harmonics, "harmonics")?.inner.s_max(), "out"))
}

/// Component `S_s`; zero above the highest order.
///
/// # Safety
/// `harmonics` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_harmonics_component(
    harmonics: *const TalbotHarmonics,
    s: usize,
    re: *mut f64,
    im: *mut f64,
) -> TalbotStatus {
    guard(|| {
        let c = object(harmonics, "harmonics")?.inner.component(s);
        write(re, c.re, "re")?;
        write(im, c.im, "im")
    })
}

/// # Safety
/// `harmonics` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_harmonics_visibility(
    harmonics: *const TalbotHarmonics,
    mode: TalbotVisibilityMode,
    out: *mut f64,
) -> TalbotStatus {
    guard(|| {
        let mode = match mode {
            TalbotVisibilityMode::Sinusoidal => VisibilityMode::Sinusoidal,
            TalbotVisibilityMode::MinMax => VisibilityMode::MinMax,
        };
        write(out, object(harmonics, "harmonics")?.inner.visibility(mode)?, "out")
    })
}

/// # Safety
/// `harmonics` must come from `talbot_averaged_harmonics` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn talbot_harmonics_free(harmonics: *mut TalbotHarmonics) {
    if !harmonics.is_null() {
        drop(Box::from_raw(harmonics));
    }
}

/// Weighted sinusoidal fit of `n` counts taken at `positions_nm`.
///
/// # Safety
/// `positions_nm` and `counts` must each point to `n` doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_fit_counts(
    positions_nm: *const f64,
    counts: *const f64,
    n: usize,
    dwell_time: f64,
    dark_rate: f64,
    period_nm: f64,
    out: *mut TalbotFit,
) -> TalbotStatus {
    guard(|| {
        if positions_nm.is_null() {
            return Err(Failure::Null("positions_nm"));
        }
        if counts.is_null() {
            return Err(Failure::Null("counts"));
        }
        let x = std::slice::from_raw_parts(positions_nm, n);
        let c = std::slice::from_raw_parts(counts, n);
        let f = fit_counts(x, c, dwell_time, dark_rate, period_nm)?;
        let fit = TalbotFit {
            offset: f.offset,
            amplitude: f.amplitude,
            phase: f.phase,
            visibility: f.visibility,
            sigma_visibility: f.sigma_visibility,
            reduced_chi_square: f.reduced_chi_square,
        };
        write(out, fit, "out")
    })
}

/// Runs the configured sweep and returns its CSV text, to be released with
/// `talbot_string_free`.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn talbot_sweep_csv(config: *const TalbotConfig, out: *mut *mut c_char) -> TalbotStatus {
    guard(|| {
        let c = &object(config, "config")?.inner;
        let table = sweep::run_sweep(c)?;
        let csv = CString::new(sweep::emit_csv(&table, c, None)).expect("CSV text has no NULs");
        write(out, csv.into_raw(), "out")
    })
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn talbot_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
