//! C ABI over the nehari-lab core.
//!
//! Grids and solve reports are opaque heap handles created by `nl_*_new` /
//! `nl_solve` and released by the matching `*_free`. Every fallible call
//! returns an `NlStatus`; on failure a message is kept per thread and can be
//! read with `nl_last_error`. Strings returned by the library are owned by the
//! caller and must be released with `nl_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use nehari_lab::energy::ModelParams;
use nehari_lab::fibering::{g_beta_profile, nehari_times, FiberCoeffs, NehariClass};
use nehari_lab::radial_core::{RadialGrid, Scheme};
use nehari_lab::soliton::sobolev_constants;
use nehari_lab::solver::{certify_ground_state, minimize_global, minimize_nehari_minus, minus_seed, SolveReport, SolverConfig};
use nehari_lab::thresholds::compute_thresholds;
use nehari_lab::LabError;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument is outside its documented range.
    InvalidArgument = 2,
    /// The parameters are valid but outside the regime of the operation.
    OutOfRegime = 3,
    /// The requested Nehari branch does not exist for this ray.
    NoBranch = 4,
    /// A numerical kernel failed (shooting, non-finite values).
    Numerical = 5,
    /// A caller-supplied buffer is too small.
    BufferTooSmall = 6,
    /// A panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlScheme {
    Uniform = 0,
    Log = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlSolveMode {
    Global = 0,
    NehariMinus = 1,
}

/// Nehari class codes: 0 none, 1 Minus, 2 Zero, 3 Plus.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlRoots {
    pub count: u32,
    /// NaN when absent.
    pub t_minus: f64,
    pub t_plus: f64,
    pub class_minus: i32,
    pub class_plus: i32,
}

/// Opaque radial grid.
pub struct NlGrid {
    grid: Arc<RadialGrid>,
}

/// Opaque solve report.
pub struct NlReport {
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &LabError) -> NlStatus {
    match e {
        LabError::InvalidArgument(_) | LabError::InvalidGrid(_) | LabError::LengthMismatch { .. } | LabError::Overlap { .. } => {
            NlStatus::InvalidArgument
        }
        LabError::OutOfRegime(_) | LabError::NoStrictDrop | LabError::TrivialPair | LabError::OffManifold { .. } => NlStatus::OutOfRegime,
        LabError::NoBranch(_) => NlStatus::NoBranch,
        _ => NlStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), NlStatus>>(f: F) -> NlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            NlStatus::Panic
        }
    }
}

fn lab<T>(r: nehari_lab::Result<T>) -> Result<T, NlStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null_error(name: &str) -> NlStatus {
    set_error(format!("{name} is null"));
    NlStatus::NullPointer
}

fn class_code(c: Option<NehariClass>) -> i32 {
    match c {
        None => 0,
        Some(NehariClass::Minus) => 1,
        Some(NehariClass::Zero) => 2,
        Some(NehariClass::Plus) => 3,
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nl_version() -> *const c_char {
    const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// The message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn nl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a grid with `n` nodes on [0, r_max].
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn nl_grid_new(n: usize, r_max: f64, scheme: NlScheme, out: *mut *mut NlGrid) -> NlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_error("out"));
        }
        let scheme = match scheme {
            NlScheme::Uniform => Scheme::Uniform,
            NlScheme::Log => Scheme::Log,
        };
        let grid = lab(RadialGrid::new(n, r_max, scheme))?;
        *out = Box::into_raw(Box::new(NlGrid { grid }));
        Ok(())
    })
}

/// # Safety
/// `grid` must come from `nl_grid_new` and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nl_grid_free(grid: *mut NlGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn nl_grid_len(grid: *const NlGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.grid.n)
}

/// Copies the node radii into `buf` (capacity `len`).
///
/// # Safety
/// `grid` must be a live grid handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn nl_grid_nodes(grid: *const NlGrid, buf: *mut f64, len: usize) -> NlStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(|| null_error("grid"))?;
        copy_out(&g.grid.nodes, buf, len)
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), NlStatus> {
    if buf.is_null() {
        return Err(null_error("buf"));
    }
    if len < src.len() {
        set_error(format!("buffer holds {len} values, {} needed", src.len()));
        return Err(NlStatus::BufferTooSmall);
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Maximizer s_β ∈ [0, ½] and maximum of g_β.
///
/// # Safety
/// `s_out` and `g_out` must be valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn nl_g_beta(p: f64, beta: f64, s_out: *mut f64, g_out: *mut f64) -> NlStatus {
    guard(|| {
        if s_out.is_null() || g_out.is_null() {
            return Err(null_error("output"));
        }
        let (s, g) = lab(g_beta_profile(p, beta))?;
        *s_out = s;
        *g_out = g;
        Ok(())
    })
}

/// Nehari times of h(t) = (t²/2)A + (λt⁴/4)B − (t^p/p)C.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn nl_fibering_roots(a: f64, b: f64, c: f64, p: f64, lambda: f64, out: *mut NlRoots) -> NlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_error("out"));
        }
        if ![a, b, c, p, lambda].iter().all(|x| x.is_finite()) || p <= 2.0 {
            set_error("coefficients must be finite and p > 2".into());
            return Err(NlStatus::InvalidArgument);
        }
        let r = nehari_times(&FiberCoeffs { a, b, c, p, lambda });
        *out = NlRoots {
            count: r.count as u32,
            t_minus: r.t_minus.unwrap_or(f64::NAN),
            t_plus: r.t_plus.unwrap_or(f64::NAN),
            class_minus: class_code(r.class_minus),
            class_plus: class_code(r.class_plus),
        };
        Ok(())
    })
}

/// Threshold report as a JSON string (free with `nl_string_free`).
///
/// # Safety
/// `grid` must be a live grid handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn nl_thresholds_json(
    grid: *const NlGrid,
    p: f64,
    lambda: f64,
    beta: f64,
    kappa: f64,
    out: *mut *mut c_char,
) -> NlStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(|| null_error("grid"))?;
        if out.is_null() {
            return Err(null_error("out"));
        }
        let consts = lab(sobolev_constants(p, &g.grid))?;
        let report = lab(compute_thresholds(p, lambda, beta, kappa, &consts))?;
        let json = serde_json::to_string(&report).map_err(|e| {
            set_error(e.to_string());
            NlStatus::Numerical
        })?;
        *out = into_c_string(json);
        Ok(())
    })
}

/// Runs one solve with default settings. A Minus-branch report is also
/// passed through ground-state certification.
///
/// # Safety
/// `grid` must be a live grid handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn nl_solve(
    grid: *const NlGrid,
    p: f64,
    lambda: f64,
    beta: f64,
    kappa: f64,
    mode: NlSolveMode,
    out: *mut *mut NlReport,
) -> NlStatus {
    guard(|| {
        let g = grid.as_ref().ok_or_else(|| null_error("grid"))?;
        if out.is_null() {
            return Err(null_error("out"));
        }
        let prm = lab(ModelParams::new(p, lambda, beta, kappa))?;
        let cfg = SolverConfig::default();
        let report = match mode {
            NlSolveMode::Global => lab(minimize_global(&prm, &g.grid, &cfg))?,
            NlSolveMode::NehariMinus => {
                let init = lab(minus_seed(&prm, &g.grid))?;
                let r = lab(minimize_nehari_minus(&prm, &g.grid, &cfg, &init))?;
                let consts = lab(sobolev_constants(p, &g.grid))?;
                certify_ground_state(r, &prm, &consts)
            }
        };
        *out = Box::into_raw(Box::new(NlReport { report }));
        Ok(())
    })
}

/// # Safety
/// `report` must come from `nl_solve` and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nl_report_free(report: *mut NlReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Energy J of the reported pair, NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn nl_report_energy(report: *const NlReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.breakdown.total)
}

/// Euler–Lagrange residual norm, NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn nl_report_residual(report: *const NlReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.residual)
}

/// 1 if the solve converged, 0 otherwise (including a null handle).
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn nl_report_converged(report: *const NlReport) -> i32 {
    report.as_ref().map_or(0, |r| r.report.converged as i32)
}

/// Nehari class code of the reported pair (see `NlRoots`).
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn nl_report_class(report: *const NlReport) -> i32 {
    report.as_ref().map_or(0, |r| class_code(r.report.nehari_class))
}

/// Copies component 0 (u) or 1 (v) of the solution into `buf`.
///
/// # Safety
/// `report` must be a live report handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn nl_report_profile(report: *const NlReport, component: u32, buf: *mut f64, len: usize) -> NlStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null_error("report"))?;
        let values = match component {
            0 => &r.report.pair.u.values,
            1 => &r.report.pair.v.values,
            other => {
                set_error(format!("component {other} is not 0 or 1"));
                return Err(NlStatus::InvalidArgument);
            }
        };
        copy_out(values, buf, len)
    })
}

/// The full report as JSON (free with `nl_string_free`).
///
/// # Safety
/// `report` must be a live report handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn nl_report_json(report: *const NlReport, out: *mut *mut c_char) -> NlStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null_error("report"))?;
        if out.is_null() {
            return Err(null_error("out"));
        }
        let json = serde_json::to_string(&r.report).map_err(|e| {
            set_error(e.to_string());
            NlStatus::Numerical
        })?;
        *out = into_c_string(json);
        Ok(())
    })
}
