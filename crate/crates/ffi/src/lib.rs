//! C interface to restartkit.
//!
//! Objects cross the boundary as opaque pointers created by `rk_*_new` /
//! `rk_*_load` style functions and released by the matching `rk_*_free`.
//! Every fallible call returns an [`RkStatus`]; on failure a description is
//! available from [`rk_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use restartkit::cli::config::ExperimentConfig;
use restartkit::cli::run_experiment;
use restartkit::cli::runner::RunReport;
use restartkit::schedule::AssignmentEnumerator;
use restartkit::{Error, ScheduleCriterion, ScheduleMode};

/// Status codes. Configuration and solver failures use the same numbers as
/// the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RkStatus {
    Ok = 0,
    Other = 1,
    Config = 2,
    SolverFailure = 3,
    Io = 4,
    NullPointer = 5,
    Panic = 6,
}

/// Schedule modes accepted by [`rk_schedule_new`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RkScheduleMode {
    BothUnknown = 0,
    AlphaKnown = 1,
    BetaKnown = 2,
    BothKnown = 3,
}

/// One grid triple `(i, j, k)` and its `h` value.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RkGridPoint {
    pub i: i64,
    pub j: u64,
    pub k: u64,
    pub h: f64,
}

/// One trace row. Missing error columns are reported as NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RkTraceRow {
    pub inner_iteration: u64,
    pub restart_index: u64,
    pub grid_i: i64,
    pub grid_j: u64,
    pub grid_k: u64,
    pub objective_value: f64,
    pub objective_error: f64,
    pub feasibility_gap: f64,
    pub reconstruction_error: f64,
}

/// Opaque experiment configuration.
pub struct RkConfig {
    inner: ExperimentConfig,
}

/// Opaque result of [`rk_run`].
pub struct RkReport {
    inner: RunReport,
}

/// Opaque schedule enumerator.
pub struct RkSchedule {
    inner: AssignmentEnumerator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    let c = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_for(err: &Error) -> RkStatus {
    if err.is_config_error() {
        RkStatus::Config
    } else if err.is_solver_failure() {
        RkStatus::SolverFailure
    } else if matches!(err, Error::Io(_) | Error::Csv(_)) {
        RkStatus::Io
    } else {
        RkStatus::Other
    }
}

/// Runs `body`, turning errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), (RkStatus, String)>) -> RkStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RkStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {msg}"));
            RkStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (RkStatus, String) {
    (status_for(&e), e.to_string())
}

fn null(what: &str) -> (RkStatus, String) {
    (RkStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RkStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (RkStatus::Config, format!("`{what}` is not valid UTF-8")))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (RkStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (RkStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a JSON configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_config_from_json(json: *const c_char, out: *mut *mut RkConfig) -> RkStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let cfg = ExperimentConfig::from_json(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RkConfig { inner: cfg }));
        Ok(())
    })
}

/// Loads a JSON configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_config_load(path: *const c_char, out: *mut *mut RkConfig) -> RkStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let path = read_str(path, "path")?;
        let cfg = ExperimentConfig::load(std::path::Path::new(path)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RkConfig { inner: cfg }));
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rk_config_free(cfg: *mut RkConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live configuration.
#[no_mangle]
pub unsafe extern "C" fn rk_config_set_seed(cfg: *mut RkConfig, seed: u64) -> RkStatus {
    guard(|| {
        deref_mut(cfg, "cfg")?.inner.seed = seed;
        Ok(())
    })
}

/// Sets the inner-iteration budget `t`.
///
/// # Safety
/// `cfg` must be a live configuration.
#[no_mangle]
pub unsafe extern "C" fn rk_config_set_budget(cfg: *mut RkConfig, budget: u64) -> RkStatus {
    guard(|| {
        let c = &mut deref_mut(cfg, "cfg")?.inner;
        let previous = c.restart.t.replace(budget);
        if let Err(e) = c.validate() {
            c.restart.t = previous;
            return Err(lib_err(e));
        }
        Ok(())
    })
}

/// Sets where the trace CSV (and next to it the summary) is written.
///
/// # Safety
/// `cfg` must be a live configuration and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rk_config_set_output(cfg: *mut RkConfig, path: *const c_char) -> RkStatus {
    guard(|| {
        let c = deref_mut(cfg, "cfg")?;
        c.inner.output_path = Some(PathBuf::from(read_str(path, "path")?));
        Ok(())
    })
}

/// Runs the configured experiment with at most `threads` workers (0 means
/// one). Writes the trace and summary files like the command-line tool.
///
/// # Safety
/// `cfg` must be a live configuration and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_run(cfg: *const RkConfig, threads: u32, out: *mut *mut RkReport) -> RkStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let cfg = deref(cfg, "cfg")?;
        let report = run_experiment(&cfg.inner, threads.max(1) as usize).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RkReport { inner: report }));
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rk_report_free(report: *mut RkReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Total inner iterations, or 0 for a null report.
///
/// # Safety
/// `report` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn rk_report_inner_iterations(report: *const RkReport) -> u64 {
    report.as_ref().map_or(0, |r| r.inner.outcome.inner_iterations)
}

/// Number of solver calls, or 0 for a null report.
///
/// # Safety
/// `report` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn rk_report_restarts(report: *const RkReport) -> u64 {
    report.as_ref().map_or(0, |r| r.inner.outcome.restarts)
}

/// Objective at the returned point, NaN for a null report.
///
/// # Safety
/// `report` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn rk_report_final_objective(report: *const RkReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.summary.final_objective)
}

/// Length of the returned point, 0 for a null report.
///
/// # Safety
/// `report` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn rk_report_dimension(report: *const RkReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.outcome.final_point.len())
}

/// Copies the returned point into `re` and `im` (either may be null), each
/// holding `len` entries. `len` must equal [`rk_report_dimension`].
///
/// # Safety
/// `re` and `im` must be null or point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rk_report_final_point(
    report: *const RkReport,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> RkStatus {
    guard(|| {
        let point = &deref(report, "report")?.inner.outcome.final_point;
        if len != point.len() {
            return Err((RkStatus::Config, format!("buffer length {len} does not match dimension {}", point.len())));
        }
        for (idx, z) in point.iter().enumerate() {
            if !re.is_null() {
                *re.add(idx) = z.re;
            }
            if !im.is_null() {
                *im.add(idx) = z.im;
            }
        }
        Ok(())
    })
}

/// Number of trace rows, 0 for a null report.
///
/// # Safety
/// `report` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn rk_report_trace_len(report: *const RkReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.outcome.trace.len())
}

/// Copies trace row `index` into `out`.
///
/// # Safety
/// `report` must be a live report and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_report_trace_row(report: *const RkReport, index: usize, out: *mut RkTraceRow) -> RkStatus {
    guard(|| {
        let trace = &deref(report, "report")?.inner.outcome.trace;
        let out = deref_mut(out, "out")?;
        let row = trace
            .get(index)
            .ok_or_else(|| (RkStatus::Config, format!("row {index} out of range (trace has {})", trace.len())))?;
        *out = RkTraceRow {
            inner_iteration: row.inner_iteration,
            restart_index: row.restart_index,
            grid_i: row.grid_i,
            grid_j: row.grid_j,
            grid_k: row.grid_k,
            objective_value: row.objective_value,
            objective_error: row.objective_error.unwrap_or(f64::NAN),
            feasibility_gap: row.feasibility_gap,
            reconstruction_error: row.reconstruction_error.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// The run summary as a JSON string owned by the caller; release it with
/// [`rk_string_free`]. Null on failure.
///
/// # Safety
/// `report` must be a live report or null.
#[no_mangle]
pub unsafe extern "C" fn rk_report_summary_json(report: *const RkReport) -> *mut c_char {
    let mut out = ptr::null_mut();
    guard(|| {
        let r = deref(report, "report")?;
        let text = serde_json::to_string(&r.inner.summary).map_err(|e| (RkStatus::Other, e.to_string()))?;
        out = CString::new(text).map_err(|e| (RkStatus::Other, e.to_string()))?.into_raw();
        Ok(())
    });
    out
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates an enumerator of the h-assignment for `mode` with exponents
/// `c1`, `c2` (both above 1).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_schedule_new(
    mode: RkScheduleMode,
    c1: f64,
    c2: f64,
    out: *mut *mut RkSchedule,
) -> RkStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let mode = match mode {
            RkScheduleMode::BothUnknown => ScheduleMode::BothUnknown,
            RkScheduleMode::AlphaKnown => ScheduleMode::AlphaKnown,
            RkScheduleMode::BetaKnown => ScheduleMode::BetaKnown,
            RkScheduleMode::BothKnown => ScheduleMode::BothKnown,
        };
        let criterion = ScheduleCriterion::new(mode, c1, c2).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(RkSchedule { inner: criterion.enumerator() }));
        Ok(())
    })
}

/// Writes the next grid triple into `out`.
///
/// # Safety
/// `schedule` must be a live enumerator and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_schedule_next(schedule: *mut RkSchedule, out: *mut RkGridPoint) -> RkStatus {
    guard(|| {
        let s = deref_mut(schedule, "schedule")?;
        let out = deref_mut(out, "out")?;
        let p = s.inner.next_point();
        let h = s.inner.criterion().h_value(p).map_err(lib_err)?;
        *out = RkGridPoint { i: p.i, j: p.j, k: p.k, h };
        Ok(())
    })
}

/// Number of grid triples with `h ≤ tau`.
///
/// # Safety
/// `schedule` must be a live enumerator and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rk_schedule_sublevel_count(schedule: *const RkSchedule, tau: f64, out: *mut u64) -> RkStatus {
    guard(|| {
        let s = deref(schedule, "schedule")?;
        *deref_mut(out, "out")? = s.inner.criterion().sublevel_count(tau);
        Ok(())
    })
}

/// # Safety
/// `schedule` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rk_schedule_free(schedule: *mut RkSchedule) {
    if !schedule.is_null() {
        drop(Box::from_raw(schedule));
    }
}
