//! C ABI over `peglab`: opaque curve and report handles, status codes and a
//! thread-local last-error message.
//!
//! Every handle returned through an out-pointer is owned by the caller and
//! must be released with the matching `*_free` function. Strings returned by
//! `peg_report_to_json` are released with `peg_string_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use peglab::cli::exit_code;
use peglab::intersection::topology;
use peglab::{solve, FourierCurve, PegError, Problem, QuadData, SolveConfig, SolveReport};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PegStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotEmbedded = 3,
    Topology = 4,
    Io = 5,
    Panic = 6,
}

/// Opaque curve handle.
pub struct PegCurve(FourierCurve);

/// Opaque solve report handle.
pub struct PegReport(SolveReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (PegStatus, String);

fn from_peg(e: PegError) -> Failure {
    let status = match e {
        PegError::NotEmbedded { .. } => PegStatus::NotEmbedded,
        PegError::Io(_) | PegError::Json(_) => PegStatus::Io,
        ref other => match exit_code(other) {
            3 => PegStatus::Topology,
            _ => PegStatus::InvalidArgument,
        },
    };
    (status, e.to_string())
}

fn null(what: &str) -> Failure {
    (PegStatus::NullPointer, format!("{what} is null"))
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> PegStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PegStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            PegStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn peg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Ellipse `a cos t + i b sin t`.
#[no_mangle]
pub unsafe extern "C" fn peg_curve_ellipse(a: f64, b: f64, out: *mut *mut PegCurve) -> PegStatus {
    guard(|| {
        let c = FourierCurve::ellipse(a, b).map_err(from_peg)?;
        write_out(out, Box::into_raw(Box::new(PegCurve(c))))
    })
}

/// Curve from its JSON form.
#[no_mangle]
pub unsafe extern "C" fn peg_curve_from_json(json: *const c_char, out: *mut *mut PegCurve) -> PegStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (PegStatus::InvalidArgument, e.to_string()))?;
        let c: FourierCurve =
            serde_json::from_str(text).map_err(|e| (PegStatus::InvalidArgument, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(PegCurve(c))))
    })
}

/// Seeded random perturbation of modes `|k| <= max_mode`.
#[no_mangle]
pub unsafe extern "C" fn peg_curve_perturb(
    curve: *const PegCurve,
    amplitude: f64,
    max_mode: usize,
    seed: u64,
    out: *mut *mut PegCurve,
) -> PegStatus {
    guard(|| {
        let c = deref(curve, "curve")?;
        let p = c.0.perturb(amplitude, max_mode, seed).map_err(from_peg)?;
        write_out(out, Box::into_raw(Box::new(PegCurve(p))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn peg_curve_free(curve: *mut PegCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Point of the curve at parameter `t`.
#[no_mangle]
pub unsafe extern "C" fn peg_curve_eval(curve: *const PegCurve, t: f64, re: *mut f64, im: *mut f64) -> PegStatus {
    guard(|| {
        let z = deref(curve, "curve")?.0.eval(t);
        write_out(re, z.re)?;
        write_out(im, z.im)
    })
}

/// Sampling embedding check with `samples >= 64` parameter values.
#[no_mangle]
pub unsafe extern "C" fn peg_curve_check_embedded(
    curve: *const PegCurve,
    samples: usize,
    embedded: *mut bool,
) -> PegStatus {
    guard(|| {
        if samples < 64 {
            return Err((PegStatus::InvalidArgument, "samples must be at least 64".into()));
        }
        let v = deref(curve, "curve")?.0.check_embedded(samples);
        write_out(embedded, v.embedded)
    })
}

fn config(grid: u32) -> SolveConfig {
    if grid == 0 {
        SolveConfig::default()
    } else {
        SolveConfig::with_grid(grid as usize)
    }
}

unsafe fn run_solve(curve: *const PegCurve, problem: Problem, grid: u32, out: *mut *mut PegReport) -> Result<(), Failure> {
    let c = deref(curve, "curve")?;
    if out.is_null() {
        return Err(null("output pointer"));
    }
    let r = solve(&c.0, &problem, &config(grid)).map_err(from_peg)?;
    write_out(out, Box::into_raw(Box::new(PegReport(r))))
}

/// Rectangles with diagonal angle `phi` in `(0, pi/2]`. `right_angle`
/// requests the exact square problem and ignores `phi`. `grid = 0` uses the
/// default seed density.
#[no_mangle]
pub unsafe extern "C" fn peg_solve_rectangle(
    curve: *const PegCurve,
    phi: f64,
    right_angle: bool,
    grid: u32,
    out: *mut *mut PegReport,
) -> PegStatus {
    guard(|| {
        let problem = if right_angle { Problem::square() } else { Problem::rectangle(phi) };
        run_solve(curve, problem, grid, out)
    })
}

/// Cyclic quadrilaterals with shape data `(s, t, phi)`.
#[no_mangle]
pub unsafe extern "C" fn peg_solve_quad(
    curve: *const PegCurve,
    s: f64,
    t: f64,
    phi: f64,
    grid: u32,
    out: *mut *mut PegReport,
) -> PegStatus {
    guard(|| {
        let data = QuadData::new(s, t, phi).map_err(from_peg)?;
        run_solve(curve, Problem::quad(data), grid, out)
    })
}

#[no_mangle]
pub unsafe extern "C" fn peg_report_free(report: *mut PegReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

#[no_mangle]
pub unsafe extern "C" fn peg_report_orbit_count(report: *const PegReport, out: *mut usize) -> PegStatus {
    guard(|| write_out(out, deref(report, "report")?.0.orbits.len()))
}

#[no_mangle]
pub unsafe extern "C" fn peg_report_signed_total(report: *const PegReport, out: *mut i64) -> PegStatus {
    guard(|| write_out(out, deref(report, "report")?.0.signed_total))
}

#[no_mangle]
pub unsafe extern "C" fn peg_report_degenerate(report: *const PegReport, out: *mut bool) -> PegStatus {
    guard(|| write_out(out, deref(report, "report")?.0.degenerate_family))
}

/// Vertices `A, B, C, D` of orbit `index` as `[re, im]` pairs in `out[8]`.
#[no_mangle]
pub unsafe extern "C" fn peg_report_orbit_vertices(report: *const PegReport, index: usize, out: *mut f64) -> PegStatus {
    guard(|| {
        let r = deref(report, "report")?;
        let orbit = r.0.orbits.get(index).ok_or_else(|| {
            (PegStatus::InvalidArgument, format!("orbit {index} out of range ({})", r.0.orbits.len()))
        })?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        for (i, v) in orbit.peg.vertices.iter().enumerate() {
            out.add(2 * i).write(v.re);
            out.add(2 * i + 1).write(v.im);
        }
        Ok(())
    })
}

/// Orientation sign shared by the orbit's members; 0 when they disagree.
#[no_mangle]
pub unsafe extern "C" fn peg_report_orbit_sign(report: *const PegReport, index: usize, out: *mut i8) -> PegStatus {
    guard(|| {
        let r = deref(report, "report")?;
        let orbit = r.0.orbits.get(index).ok_or_else(|| {
            (PegStatus::InvalidArgument, format!("orbit {index} out of range ({})", r.0.orbits.len()))
        })?;
        write_out(out, orbit.orbit_sign.unwrap_or(0))
    })
}

/// Runs the ledger and Euler bookkeeping, attaches the result to the report
/// and writes the Euler characteristic. Returns `Topology` if the
/// accounting fails; the block is still attached in that case.
#[no_mangle]
pub unsafe extern "C" fn peg_report_topology(report: *mut PegReport, global_sign: i8, chi: *mut i64) -> PegStatus {
    guard(|| {
        let r = report.as_mut().ok_or_else(|| null("report"))?;
        let block = topology(&r.0, global_sign).map_err(from_peg)?;
        let failed = block.failed();
        write_out(chi, block.euler_chi)?;
        r.0.topology = Some(block);
        if failed {
            return Err((PegStatus::Topology, "topology check failed".into()));
        }
        Ok(())
    })
}

/// Report as JSON. Release with `peg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn peg_report_to_json(report: *const PegReport, out: *mut *mut c_char) -> PegStatus {
    guard(|| {
        let r = deref(report, "report")?;
        let text = serde_json::to_string(&r.0).map_err(|e| (PegStatus::Io, e.to_string()))?;
        let c = CString::new(text).map_err(|e| (PegStatus::Io, e.to_string()))?;
        write_out(out, c.into_raw())
    })
}

#[no_mangle]
pub unsafe extern "C" fn peg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
