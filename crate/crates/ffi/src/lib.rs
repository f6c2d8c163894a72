//! C ABI over the `fracsym` library.
//!
//! Objects are opaque heap handles created by `*_new`/`*_load` style calls
//! and released with the matching `*_free`. Every fallible call returns a
//! [`FracsymStatus`]; on failure the message is available from
//! [`fracsym_last_error_message`] on the same thread until the next failing
//! call. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use fracsym::geometry::fraenkel_asymmetry;
use fracsym::rearrange::{schwarz_function, steiner_function};
use fracsym::spectral::{assemble_stiffness, first_eigenpair};
use fracsym::{
    energy, fourier, grid, Error, FracParams, Grid, GridFunction, IndicatorSet, KernelSpec,
};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracsymStatus {
    FracsymOk = 0,
    /// A required pointer was null or a string was not UTF-8.
    FracsymNullArgument = 1,
    FracsymInvalidGrid = 2,
    FracsymInvalidParameter = 3,
    FracsymDomain = 4,
    FracsymGridMismatch = 5,
    FracsymMalformedFile = 6,
    FracsymNoConvergence = 7,
    FracsymTruncation = 8,
    FracsymUnsupported = 9,
    FracsymIo = 10,
    /// The library panicked; the handle arguments are left untouched.
    FracsymInternal = 11,
}

/// Opaque uniform grid.
pub struct FracsymGrid(Grid);

/// Opaque piecewise-constant grid function.
pub struct FracsymFunction(GridFunction);

/// Opaque set of grid cells.
pub struct FracsymSet(IndicatorSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FracsymStatus {
    match e {
        Error::InvalidGrid(_) => FracsymStatus::FracsymInvalidGrid,
        Error::InvalidParameter(_) | Error::InvalidKernel(_) => FracsymStatus::FracsymInvalidParameter,
        Error::Domain(_) | Error::NonFinite(_) => FracsymStatus::FracsymDomain,
        Error::GridMismatch(_) => FracsymStatus::FracsymGridMismatch,
        Error::MalformedHeader(_) | Error::ShapeMismatch { .. } => FracsymStatus::FracsymMalformedFile,
        Error::NoConvergence { .. } => FracsymStatus::FracsymNoConvergence,
        Error::Truncation { .. } => FracsymStatus::FracsymTruncation,
        Error::Unsupported(_) => FracsymStatus::FracsymUnsupported,
        Error::Io(_) => FracsymStatus::FracsymIo,
    }
}

/// Internal failure carrying its status.
struct Fail(FracsymStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FracsymStatus::FracsymNullArgument, format!("{what} is null"))
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FracsymStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FracsymStatus::FracsymOk,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            FracsymStatus::FracsymInternal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_path(path: *const c_char) -> Result<String, Fail> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_string)
        .map_err(|_| Fail(FracsymStatus::FracsymNullArgument, "path is not UTF-8".into()))
}

unsafe fn read_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fracsym_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fracsym_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a grid with `dim` (1 or 2) axes; `shape` and `origin` hold `dim`
/// entries, `origin` being the lower box corner.
///
/// # Safety
/// `shape` and `origin` must point to `dim` readable values; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fracsym_grid_new(
    dim: usize,
    shape: *const usize,
    origin: *const f64,
    spacing: f64,
    periodic: bool,
    out: *mut *mut FracsymGrid,
) -> FracsymStatus {
    guard(|| {
        let shape = read_slice(shape, dim, "shape")?;
        let origin = read_slice(origin, dim, "origin")?;
        let g = Grid::new(shape, origin, spacing, periodic)?;
        write_out(out, Box::into_raw(Box::new(FracsymGrid(g))), "out")
    })
}

/// # Safety
/// `grid` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fracsym_grid_free(grid: *mut FracsymGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of cells of a grid (0 for a null handle).
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracsym_grid_len(grid: *const FracsymGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Function with the given cell values (row-major) on `grid`.
///
/// # Safety
/// `values` must point to `len` readable doubles; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn fracsym_function_new(
    grid: *const FracsymGrid,
    values: *const f64,
    len: usize,
    out: *mut *mut FracsymFunction,
) -> FracsymStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let v = read_slice(values, len, "values")?;
        let f = GridFunction::new(g.0.clone(), v.to_vec())?;
        write_out(out, Box::into_raw(Box::new(FracsymFunction(f))), "out")
    })
}

/// # Safety
/// `f` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fracsym_function_free(f: *mut FracsymFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of cells (0 for a null handle).
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracsym_function_len(f: *const FracsymFunction) -> usize {
    f.as_ref().map_or(0, |f| f.0.len())
}

/// Copies the cell values into `buf`, which must hold exactly
/// `fracsym_function_len(f)` doubles.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fracsym_function_values(f: *const FracsymFunction, buf: *mut f64, len: usize) -> FracsymStatus {
    guard(|| {
        let f = deref(f, "function")?;
        if len != f.0.len() {
            return Err(Fail(
                FracsymStatus::FracsymInvalidParameter,
                format!("buffer holds {len} values, the function has {}", f.0.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(f.0.values().as_ptr(), buf, len);
        Ok(())
    })
}

/// Loads a function (masks become indicators) from a grid file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracsym_function_load(path: *const c_char, out: *mut *mut FracsymFunction) -> FracsymStatus {
    guard(|| {
        let p = read_path(path)?;
        let f = grid::load(p)?.into_function();
        write_out(out, Box::into_raw(Box::new(FracsymFunction(f))), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `f` a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracsym_function_save(f: *const FracsymFunction, path: *const c_char) -> FracsymStatus {
    guard(|| {
        let f = deref(f, "function")?;
        grid::save_function(&f.0, read_path(path)?)?;
        Ok(())
    })
}

/// Set from a 0/1 byte mask (row-major).
///
/// # Safety
/// `mask` must point to `len` readable bytes; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn fracsym_set_new(
    grid: *const FracsymGrid,
    mask: *const u8,
    len: usize,
    out: *mut *mut FracsymSet,
) -> FracsymStatus {
    guard(|| {
        let g = deref(grid, "grid")?;
        let m = read_slice(mask, len, "mask")?;
        if let Some(i) = m.iter().position(|&b| b > 1) {
            return Err(Fail(FracsymStatus::FracsymDomain, format!("mask byte {i} is neither 0 nor 1")));
        }
        let set = IndicatorSet::new(g.0.clone(), m.iter().map(|&b| b == 1).collect())?;
        write_out(out, Box::into_raw(Box::new(FracsymSet(set))), "out")
    })
}

/// # Safety
/// `set` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fracsym_set_free(set: *mut FracsymSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of cells in the set (0 for a null handle).
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracsym_set_count(set: *const FracsymSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.count())
}

/// Symmetric-decreasing rearrangement about the box center.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracsym_schwarz(f: *const FracsymFunction, out: *mut *mut FracsymFunction) -> FracsymStatus {
    guard(|| {
        let r = schwarz_function(&deref(f, "function")?.0)?;
        write_out(out, Box::into_raw(Box::new(FracsymFunction(r))), "out")
    })
}

/// Steiner rearrangement along `axis`.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracsym_steiner(
    f: *const FracsymFunction,
    axis: usize,
    out: *mut *mut FracsymFunction,
) -> FracsymStatus {
    guard(|| {
        let r = steiner_function(&deref(f, "function")?.0, axis)?;
        write_out(out, Box::into_raw(Box::new(FracsymFunction(r))), "out")
    })
}

/// Isotropic Gagliardo seminorm [u]_{W^{s,p}}.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracsym_gagliardo_seminorm(
    f: *const FracsymFunction,
    s: f64,
    p: f64,
    out: *mut f64,
) -> FracsymStatus {
    guard(|| {
        let u = &deref(f, "function")?.0;
        let params = FracParams::new(u.grid().dim(), s, p)?;
        let r = energy::gagliardo_seminorm(u, &params, &KernelSpec::isotropic())?;
        write_out(out, r.value, "out")
    })
}

/// Fractional perimeter P_s of a set.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracsym_fractional_perimeter(set: *const FracsymSet, s: f64, out: *mut f64) -> FracsymStatus {
    guard(|| {
        let v = energy::fractional_perimeter(&deref(set, "set")?.0, s)?;
        write_out(out, v, "out")
    })
}

/// Fraenkel asymmetry of a set.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracsym_fraenkel_asymmetry(set: *const FracsymSet, out: *mut f64) -> FracsymStatus {
    guard(|| {
        let v = fraenkel_asymmetry(&deref(set, "set")?.0)?;
        write_out(out, v, "out")
    })
}

/// First Dirichlet eigenvalue of (−Δ)ˢ on the set; the eigenfunction is
/// written to `eigenfunction` when that pointer is non-null.
///
/// # Safety
/// Handles must be live; `lambda` writable; `eigenfunction` null or writable.
#[no_mangle]
pub unsafe extern "C" fn fracsym_first_eigenpair(
    set: *const FracsymSet,
    s: f64,
    tol: f64,
    lambda: *mut f64,
    eigenfunction: *mut *mut FracsymFunction,
) -> FracsymStatus {
    guard(|| {
        let a = assemble_stiffness(&deref(set, "set")?.0, s)?;
        let r = first_eigenpair(&a, tol)?;
        write_out(lambda, r.lambda1, "lambda")?;
        if !eigenfunction.is_null() {
            eigenfunction.write(Box::into_raw(Box::new(FracsymFunction(r.eigenfunction))));
        }
        Ok(())
    })
}

/// Fourier-multiplier fractional Laplacian of a periodic function.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracsym_fractional_laplacian(
    f: *const FracsymFunction,
    s: f64,
    out: *mut *mut FracsymFunction,
) -> FracsymStatus {
    guard(|| {
        let r = fourier::fractional_laplacian_spectral(&deref(f, "function")?.0, s)?;
        write_out(out, Box::into_raw(Box::new(FracsymFunction(r))), "out")
    })
}
