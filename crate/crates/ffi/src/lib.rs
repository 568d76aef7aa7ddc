//! C ABI for the ismuc solver.
//!
//! Objects are opaque handles created by `ismuc_*_new`/`_generate`/`_solve`
//! style functions and released with the matching `_free`. Every fallible
//! call returns an [`IsmucStatus`]; on failure a message for the calling
//! thread is available from [`ismuc_last_error_message`]. Panics never cross
//! the boundary; they are reported as `ISMUC_STATUS_PANIC`.
//!
//! Complex vectors are exchanged as interleaved `re, im` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ismuc::channels;
use ismuc::experiments::{self, ExperimentError, RunConfig};
use ismuc::optimizer::{self, OptimizerError, SolveReport};
use ismuc::{BeamformingSolution, ChannelSet, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsmucStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Infeasible = 4,
    SolverFailure = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Run configuration handle.
pub struct IsmucConfig {
    run: RunConfig,
}

/// Channel realization handle.
pub struct IsmucChannels {
    set: ChannelSet,
}

/// Solution and solve report handle.
pub struct IsmucSolution {
    solution: BeamformingSolution,
    report: SolveReport,
}

/// Achieved rates (bits/s/Hz) and illumination power (W).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IsmucRates {
    pub r_unicast: f64,
    pub r_multicast_nu: f64,
    pub r_multicast_fu: f64,
    pub r_multicast: f64,
    pub illumination: f64,
    /// 1 if every constraint holds within tolerance.
    pub feasible: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(IsmucStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Optimizer(OptimizerError::InfeasibleInstance { .. })
            | Error::Experiment(ExperimentError::Optimizer(OptimizerError::InfeasibleInstance { .. })) => {
                IsmucStatus::Infeasible
            }
            Error::Model(_) | Error::Channel(_) | Error::Experiment(_) => IsmucStatus::InvalidConfig,
            Error::Optimizer(OptimizerError::InvalidConfig(_) | OptimizerError::Model(_)) => IsmucStatus::InvalidConfig,
            _ => IsmucStatus::SolverFailure,
        };
        Failure(status, e.to_string())
    }
}

fn failure(status: IsmucStatus, msg: &str) -> Failure {
    Failure(status, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IsmucStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IsmucStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            IsmucStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| failure(IsmucStatus::NullPointer, &format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| failure(IsmucStatus::NullPointer, &format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(failure(IsmucStatus::NullPointer, &format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| failure(IsmucStatus::InvalidArgument, &format!("{what} is not UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ismuc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ismuc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Default configuration. Never null.
#[no_mangle]
pub extern "C" fn ismuc_config_new_default() -> *mut IsmucConfig {
    Box::into_raw(Box::new(IsmucConfig { run: RunConfig::default() }))
}

/// Parses a TOML run configuration.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ismuc_config_from_toml(toml: *const c_char, out: *mut *mut IsmucConfig) -> IsmucStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let run = RunConfig::from_toml_str(text(toml, "toml")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(IsmucConfig { run }));
        Ok(())
    })
}

/// Sets the run seed (channels and initial phases).
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ismuc_config_set_seed(config: *mut IsmucConfig, seed: u64) -> IsmucStatus {
    guard(|| {
        out_ptr(config, "config")?.run.system.seed = Some(seed);
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ismuc_config_free(config: *mut IsmucConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Draws channels for the configuration and its seed.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ismuc_channels_generate(
    config: *const IsmucConfig,
    out: *mut *mut IsmucChannels,
) -> IsmucStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = deref(config, "config")?;
        let system = cfg.run.system_config().map_err(Error::from)?;
        let set = experiments::channels_for(&system, &cfg.run.channel).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(IsmucChannels { set }));
        Ok(())
    })
}

/// Loads channels from the JSON channel-file format.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ismuc_channels_from_json(json: *const c_char, out: *mut *mut IsmucChannels) -> IsmucStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let set = channels::channels_from_json(text(json, "json")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(IsmucChannels { set }));
        Ok(())
    })
}

/// # Safety
/// `channels` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ismuc_channels_free(channels: *mut IsmucChannels) {
    if !channels.is_null() {
        drop(Box::from_raw(channels));
    }
}

/// Runs the full solver.
///
/// # Safety
/// `config` and `channels` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ismuc_solve(
    config: *const IsmucConfig,
    channels: *const IsmucChannels,
    out: *mut *mut IsmucSolution,
) -> IsmucStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = deref(config, "config")?;
        let ch = deref(channels, "channels")?;
        let system = cfg.run.system_config().map_err(Error::from)?;
        let (solution, report) = optimizer::dinkelbach_solve(&system, &ch.set, &cfg.run.solver).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(IsmucSolution { solution, report }));
        Ok(())
    })
}

/// # Safety
/// `solution` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ismuc_solution_free(solution: *mut IsmucSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ismuc_solution_rates(solution: *const IsmucSolution, out: *mut IsmucRates) -> IsmucStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let r = &deref(solution, "solution")?.report;
        *out = IsmucRates {
            r_unicast: r.rates.r_unicast,
            r_multicast_nu: r.rates.r_multicast_nu,
            r_multicast_fu: r.rates.r_multicast_fu,
            r_multicast: r.rates.r_multicast,
            illumination: r.rates.illumination,
            feasible: i32::from(r.feasibility.feasible),
        };
        Ok(())
    })
}

/// Antenna count `N` and element count `K` of the solution.
///
/// # Safety
/// `solution` must be a live handle; `n` and `k` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ismuc_solution_dims(
    solution: *const IsmucSolution,
    n: *mut usize,
    k: *mut usize,
) -> IsmucStatus {
    guard(|| {
        let s = &deref(solution, "solution")?.solution;
        *out_ptr(n, "n")? = s.w_u.len();
        *out_ptr(k, "k")? = s.reflect.len();
        Ok(())
    })
}

/// Copies both beamformers as `2 N` interleaved doubles each.
///
/// # Safety
/// `w_u` and `w_m` must each point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ismuc_solution_beamformers(
    solution: *const IsmucSolution,
    w_u: *mut f64,
    w_m: *mut f64,
    len: usize,
) -> IsmucStatus {
    guard(|| {
        let s = &deref(solution, "solution")?.solution;
        let need = 2 * s.w_u.len();
        if len < need {
            return Err(failure(IsmucStatus::BufferTooSmall, &format!("need {need} doubles, got {len}")));
        }
        for (buf, v, what) in [(w_u, &s.w_u, "w_u"), (w_m, &s.w_m, "w_m")] {
            if buf.is_null() {
                return Err(failure(IsmucStatus::NullPointer, &format!("{what} is null")));
            }
            let dst = std::slice::from_raw_parts_mut(buf, need);
            for (i, z) in v.iter().enumerate() {
                dst[2 * i] = z.re;
                dst[2 * i + 1] = z.im;
            }
        }
        Ok(())
    })
}

/// Copies the `K` IRS phases in radians.
///
/// # Safety
/// `phases` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ismuc_solution_phases(
    solution: *const IsmucSolution,
    phases: *mut f64,
    len: usize,
) -> IsmucStatus {
    guard(|| {
        let s = &deref(solution, "solution")?.solution;
        let src = s.reflect.phases();
        if len < src.len() {
            return Err(failure(IsmucStatus::BufferTooSmall, &format!("need {} doubles, got {len}", src.len())));
        }
        if src.is_empty() {
            return Ok(());
        }
        if phases.is_null() {
            return Err(failure(IsmucStatus::NullPointer, "phases is null"));
        }
        std::slice::from_raw_parts_mut(phases, src.len()).copy_from_slice(src);
        Ok(())
    })
}

/// Solve report as JSON. Release with [`ismuc_string_free`].
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ismuc_solution_report_json(
    solution: *const IsmucSolution,
    out: *mut *mut c_char,
) -> IsmucStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let json = deref(solution, "solution")?.report.to_json();
        *out = CString::new(json).expect("json has no nul bytes").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ismuc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
