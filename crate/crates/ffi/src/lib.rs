//! C ABI over `aniso-plap`.
//!
//! Every function returns an [`ApStatus`]; on failure a message is kept per
//! thread and can be read with [`ap_last_error`]. Solutions are returned as
//! opaque handles that the caller releases with the matching `*_free`.
//! Strings are NUL-terminated UTF-8 in the textual forms accepted by the CLI
//! (`rect:1,1`, `lq:2`, ...). A spacing `h <= 0` selects the domain default.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aniso_plap::cheeger::cheeger_estimate;
use aniso_plap::pde::{build_mesh, solve_eigen_on, solve_torsion_on, EigenResult, TorsionResult};
use aniso_plap::{ConvexPolygon, DomainSpec, Error, Grid, GridField, MinkowskiNorm};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    GridTooCoarse = 5,
    NotConverged = 6,
    Geometry = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// Node layout of a solution: `values[i + nx*j]` sits at
/// `(origin_x + i h, origin_y + j h)`; nodes outside the domain hold zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ApGrid {
    pub nx: usize,
    pub ny: usize,
    pub origin_x: f64,
    pub origin_y: f64,
    pub h: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ApEigenSummary {
    pub lambda: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ApTorsionSummary {
    /// Torsional rigidity `∫v`.
    pub torsion: f64,
    /// `max v`.
    pub max: f64,
    /// `∫F(∇v)^p`.
    pub dual: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ApCheeger {
    pub h_est: f64,
    pub r_star: f64,
    pub lower: f64,
    pub upper: f64,
    pub inradius: f64,
    /// Nonzero when `h_est` fell back to the upper bound.
    pub fallback: i32,
}

/// Opaque eigenpair.
pub struct ApEigen(EigenResult);

/// Opaque torsion solution.
pub struct ApTorsion(TorsionResult);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: ApStatus, msg: impl Into<String>) -> ApStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> ApStatus {
    match e {
        Error::Parse { .. } => ApStatus::Parse,
        Error::InvalidArgument(_) => ApStatus::InvalidArgument,
        Error::GridTooCoarse { .. } => ApStatus::GridTooCoarse,
        Error::NotConverged { .. } => ApStatus::NotConverged,
        Error::EmptyErosion { .. } => ApStatus::Geometry,
        _ => ApStatus::Internal,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), ApStatus>) -> ApStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ApStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(ApStatus::Internal, "panic inside aniso-plap"),
    }
}

fn lift<T>(r: aniso_plap::Result<T>) -> Result<T, ApStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, ApStatus> {
    if s.is_null() {
        return Err(fail(ApStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(ApStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn problem(domain: *const c_char, norm: *const c_char) -> Result<(ConvexPolygon, MinkowskiNorm), ApStatus> {
    let norm: MinkowskiNorm = lift(read_str(norm, "norm")?.parse())?;
    let spec: DomainSpec = lift(read_str(domain, "domain")?.parse())?;
    Ok((lift(spec.build(&norm))?, norm))
}

fn spacing(domain: &ConvexPolygon, h: f64) -> f64 {
    if h > 0.0 {
        h
    } else {
        Grid::default_spacing(domain)
    }
}

fn grid_of(field: &GridField) -> ApGrid {
    let g = &field.grid;
    ApGrid { nx: g.nx, ny: g.ny, origin_x: g.origin[0], origin_y: g.origin[1], h: g.h }
}

unsafe fn copy_values(field: &GridField, out: *mut f64, len: usize) -> Result<(), ApStatus> {
    let n = field.values.len();
    if out.is_null() {
        return Err(fail(ApStatus::NullPointer, "output buffer is null"));
    }
    if len < n {
        return Err(fail(ApStatus::BufferTooSmall, format!("buffer holds {len} values, need {n}")));
    }
    ptr::copy_nonoverlapping(field.values.as_ptr(), out, n);
    Ok(())
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), ApStatus> {
    if out.is_null() {
        return Err(fail(ApStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (truncated and
/// NUL-terminated) and returns its full length in bytes, excluding the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ap_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `π_p = 2π (p-1)^{1/p} / (p sin(π/p))`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ap_pi_p(p: f64, out: *mut f64) -> ApStatus {
    guard(|| {
        let v = lift(aniso_plap::pi_p(p))?;
        write_out(out, v)
    })
}

/// First Dirichlet eigenpair. On success `*out` owns a handle to release
/// with [`ap_eigen_free`].
///
/// # Safety
/// `domain` and `norm` must be null or NUL-terminated strings; `out` must be
/// null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ap_eigen_solve(
    domain: *const c_char,
    norm: *const c_char,
    p: f64,
    h: f64,
    tol: f64,
    out: *mut *mut ApEigen,
) -> ApStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(ApStatus::NullPointer, "output pointer is null"));
        }
        let (domain, norm) = problem(domain, norm)?;
        let mesh = lift(build_mesh(&domain, spacing(&domain, h)))?;
        let e = lift(solve_eigen_on(mesh, domain.provenance(), &norm, p, tol))?;
        *out = Box::into_raw(Box::new(ApEigen(e)));
        Ok(())
    })
}

/// # Safety
/// `e` must be a live handle from [`ap_eigen_solve`]; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ap_eigen_summary(e: *const ApEigen, out: *mut ApEigenSummary) -> ApStatus {
    guard(|| {
        let e = &e.as_ref().ok_or_else(|| fail(ApStatus::NullPointer, "handle is null"))?.0;
        write_out(out, ApEigenSummary { lambda: e.lambda, iterations: e.iterations, residual: e.residual })
    })
}

/// # Safety
/// As [`ap_eigen_summary`].
#[no_mangle]
pub unsafe extern "C" fn ap_eigen_grid(e: *const ApEigen, out: *mut ApGrid) -> ApStatus {
    guard(|| {
        let e = &e.as_ref().ok_or_else(|| fail(ApStatus::NullPointer, "handle is null"))?.0;
        write_out(out, grid_of(&e.u))
    })
}

/// Copies the eigenfunction, normalized to `max u = 1`, into `out`, which
/// must hold `nx * ny` values.
///
/// # Safety
/// `e` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ap_eigen_values(e: *const ApEigen, out: *mut f64, len: usize) -> ApStatus {
    guard(|| {
        let e = &e.as_ref().ok_or_else(|| fail(ApStatus::NullPointer, "handle is null"))?.0;
        copy_values(&e.u, out, len)
    })
}

/// # Safety
/// `e` must be null or a handle from [`ap_eigen_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ap_eigen_free(e: *mut ApEigen) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Torsion function of `-Q_p v = 1`. On success `*out` owns a handle to
/// release with [`ap_torsion_free`].
///
/// # Safety
/// As [`ap_eigen_solve`].
#[no_mangle]
pub unsafe extern "C" fn ap_torsion_solve(
    domain: *const c_char,
    norm: *const c_char,
    p: f64,
    h: f64,
    tol: f64,
    out: *mut *mut ApTorsion,
) -> ApStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(ApStatus::NullPointer, "output pointer is null"));
        }
        let (domain, norm) = problem(domain, norm)?;
        let mesh = lift(build_mesh(&domain, spacing(&domain, h)))?;
        let t = lift(solve_torsion_on(mesh, domain.provenance(), &norm, p, tol))?;
        *out = Box::into_raw(Box::new(ApTorsion(t)));
        Ok(())
    })
}

/// # Safety
/// `t` must be a live handle from [`ap_torsion_solve`]; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ap_torsion_summary(t: *const ApTorsion, out: *mut ApTorsionSummary) -> ApStatus {
    guard(|| {
        let t = &t.as_ref().ok_or_else(|| fail(ApStatus::NullPointer, "handle is null"))?.0;
        write_out(
            out,
            ApTorsionSummary {
                torsion: t.torsion,
                max: t.max,
                dual: t.dual,
                iterations: t.iterations,
                residual: t.residual,
            },
        )
    })
}

/// # Safety
/// As [`ap_torsion_summary`].
#[no_mangle]
pub unsafe extern "C" fn ap_torsion_grid(t: *const ApTorsion, out: *mut ApGrid) -> ApStatus {
    guard(|| {
        let t = &t.as_ref().ok_or_else(|| fail(ApStatus::NullPointer, "handle is null"))?.0;
        write_out(out, grid_of(&t.v))
    })
}

/// # Safety
/// `t` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ap_torsion_values(t: *const ApTorsion, out: *mut f64, len: usize) -> ApStatus {
    guard(|| {
        let t = &t.as_ref().ok_or_else(|| fail(ApStatus::NullPointer, "handle is null"))?.0;
        copy_values(&t.v, out, len)
    })
}

/// # Safety
/// `t` must be null or a handle from [`ap_torsion_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ap_torsion_free(t: *mut ApTorsion) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Cheeger bounds and the rolling-Wulff estimate from an `m`-radius sweep.
///
/// # Safety
/// `domain` and `norm` must be null or NUL-terminated strings; `out` must be
/// null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ap_cheeger(domain: *const c_char, norm: *const c_char, m: usize, out: *mut ApCheeger) -> ApStatus {
    guard(|| {
        let (domain, norm) = problem(domain, norm)?;
        let c = lift(cheeger_estimate(&domain, &norm, m))?;
        write_out(
            out,
            ApCheeger {
                h_est: c.h_est,
                r_star: c.r_star,
                lower: c.lower,
                upper: c.upper,
                inradius: c.inradius,
                fallback: i32::from(c.fallback),
            },
        )
    })
}
