//! C ABI over the chern-lab core.
//!
//! Fields and reports cross the boundary as opaque handles owned by the
//! caller and released with the matching `*_free`. Every entry point returns
//! a [`ClStatus`]; on failure the message is kept per thread and can be read
//! with [`cl_last_error`] until the next failing call on that thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use chern_lab::chern;
use chern_lab::error::Error;
use chern_lab::fields::{self, Window};
use chern_lab::grid::Grid;
use chern_lab::mvf::{MvfFile, MvfKind};
use chern_lab::report::Report;
use chern_lab::suites::{self, Suite, SuiteConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Shapes, grids or degrees that do not fit together.
    Mismatch = 3,
    /// A numerical precondition failed (spectral gap, transport drift).
    Numerical = 4,
    Io = 5,
    Format = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClFieldKind {
    Unitary = 0,
    Projection = 1,
    Connection = 2,
    Form = 3,
}

/// A sampled field: unitary, projection, connection or plain form.
pub struct ClField {
    file: MvfFile,
}

/// The outcome of a verification suite.
pub struct ClReport {
    report: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ClStatus {
    match e {
        Error::GridMismatch(_)
        | Error::DimMismatch(_)
        | Error::InvalidGrid(_)
        | Error::AxisNotFound(_)
        | Error::Degree(_) => ClStatus::Mismatch,
        Error::InvalidInput(_) | Error::Invariant(_) | Error::NotTorus(_) => ClStatus::InvalidArgument,
        Error::GapFailure(_) | Error::Drift(_) | Error::RouteMismatch(_) => ClStatus::Numerical,
        Error::Io(_) => ClStatus::Io,
        Error::Format(_) => ClStatus::Format,
    }
}

/// Runs `f`, recording its error or panic.
fn guard(f: impl FnOnce() -> Result<(), ClStatus>) -> ClStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ClStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside chern-lab");
            ClStatus::Panic
        }
    }
}

fn fail(e: Error) -> ClStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> ClStatus {
    set_error(&format!("{what} is null"));
    ClStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, ClStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(&format!("{what} is not UTF-8"));
        ClStatus::InvalidArgument
    })
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// The winding field t ↦ e^{2πimt} on a periodic circle of `size` points.
///
/// # Safety
/// `out` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn cl_field_winding(size: usize, m: i64, out: *mut *mut ClField) -> ClStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = Grid::torus(&["t"], size, 1.0).map_err(fail)?;
        let u = Window::new(0, 1).and_then(|w| fields::winding_unitary(&g, "t", &[m], w)).map_err(fail)?;
        put(out, ClField { file: MvfFile::unitary(&u) });
        Ok(())
    })
}

/// The rank-1 Bloch projection of degree `degree` on a `size`² torus.
///
/// # Safety
/// `out` must be a valid pointer to write a handle into.
#[no_mangle]
pub unsafe extern "C" fn cl_field_bloch(size: usize, degree: i64, out: *mut *mut ClField) -> ClStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = Grid::torus(&["x", "y"], size, 1.0).map_err(fail)?;
        let p = fields::bloch_projection(&g, degree).map_err(fail)?;
        put(out, ClField { file: MvfFile::projection(&p) });
        Ok(())
    })
}

/// Reads a field file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_field_read(path: *const c_char, out: *mut *mut ClField) -> ClStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let file = MvfFile::read(path).map_err(fail)?;
        put(out, ClField { file });
        Ok(())
    })
}

/// Writes a field file.
///
/// # Safety
/// `field` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cl_field_write(field: *const ClField, path: *const c_char) -> ClStatus {
    guard(|| {
        let field = field.as_ref().ok_or_else(|| null("field"))?;
        let path = str_arg(path, "path")?;
        field.file.write(path).map_err(fail)
    })
}

/// # Safety
/// `field` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_field_kind(field: *const ClField, out: *mut ClFieldKind) -> ClStatus {
    guard(|| {
        let field = field.as_ref().ok_or_else(|| null("field"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = match field.file.header.kind {
            MvfKind::Unitary => ClFieldKind::Unitary,
            MvfKind::Projection => ClFieldKind::Projection,
            MvfKind::Connection => ClFieldKind::Connection,
            MvfKind::Form => ClFieldKind::Form,
        };
        Ok(())
    })
}

/// Integral of the top-degree part of the Chern form over the whole grid.
/// For a winding or Bloch field this is the Chern number.
///
/// # Safety
/// `field` must be a live handle; `re` and `im` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cl_field_chern_integral(field: *const ClField, re: *mut f64, im: *mut f64) -> ClStatus {
    guard(|| {
        let field = field.as_ref().ok_or_else(|| null("field"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let file = &field.file;
        let top = file.grid().dim();
        let ch = match file.header.kind {
            MvfKind::Unitary => file.to_unitary().and_then(|u| chern::odd_chern(&u, Some(top))),
            MvfKind::Projection => file.to_projection().and_then(|p| chern::even_chern(&p, Some(top))),
            MvfKind::Connection => file.to_connection().and_then(|c| chern::connection_chern(&c, Some(top))),
            MvfKind::Form => Err(Error::InvalidInput("a form has no Chern form".into())),
        }
        .map_err(fail)?;
        let v = chern::integrate_degree(&ch, top).map_err(fail)?;
        *re = v.re;
        *im = v.im;
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_field_free(field: *mut ClField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Runs a verification suite by name ("stokes", "deta", ...) or "all".
///
/// # Safety
/// `suite` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_suite_run(
    suite: *const c_char,
    size: usize,
    seed: u64,
    out: *mut *mut ClReport,
) -> ClStatus {
    guard(|| {
        let name = str_arg(suite, "suite")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = SuiteConfig { size, seed, ..Default::default() };
        let report = if name == "all" {
            suites::run_all(cfg)
        } else {
            let s = Suite::from_name(name).ok_or_else(|| {
                set_error(&format!("unknown suite {name}"));
                ClStatus::InvalidArgument
            })?;
            suites::run(s, cfg)
        }
        .map_err(fail)?;
        put(out, ClReport { report });
        Ok(())
    })
}

/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_report_pass(report: *const ClReport, out: *mut bool) -> ClStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = report.report.pass;
        Ok(())
    })
}

/// The report as JSON. Release the string with [`cl_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_report_json(report: *const ClReport, out: *mut *mut c_char) -> ClStatus {
    guard(|| {
        let report = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let text = serde_json::to_string(&report.report).map_err(|e| fail(Error::Format(e.to_string())))?;
        *out = CString::new(text).map_or(ptr::null_mut(), CString::into_raw);
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_report_free(report: *mut ClReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(status_of(&Error::Drift(1.0)), ClStatus::Numerical);
        assert_eq!(status_of(&Error::Degree("x".into())), ClStatus::Mismatch);
        assert_eq!(status_of(&Error::Format("x".into())), ClStatus::Format);
    }
}
