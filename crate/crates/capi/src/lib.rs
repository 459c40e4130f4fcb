//! C ABI over the starcomb library.
//!
//! Every constructor hands back an opaque handle the caller later frees with
//! the matching `_free` function; every fallible call returns an
//! [`sc_status`] and leaves a human-readable message retrievable with
//! [`sc_last_error_message`] on failure. Panics are caught at the boundary
//! and reported as `SC_ERR_PANIC`; handles are never returned half built.
//!
//! Buffer conventions: matrices are row-major, complex numbers are `(re, im)`
//! pairs, and every array parameter documents its expected length in terms of
//! the scheme dimensions `d` (physical) and `m` (internal).

#![allow(non_camel_case_types)]

use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use starcomb::comb::{generate_comb, Decoration, DecorationAtom, WeightedComb};
use starcomb::error::Error;
use starcomb::lattice::{BoxRegion, LatticeBasis};
use starcomb::scheme::{validate_scheme, SchemeSpec, ValidationOptions};
use starcomb::spectral::autocorr::{autocorr_closed, AutocorrelationTable};
use starcomb::spectral::diffraction::{
    default_internal_cut, diffraction_peaks, fourier_bohr_estimate, PeakList,
};
use starcomb::spectral::{density_closed, weyl_average};
use starcomb::weights::WeightFunction;

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum sc_status {
    SC_OK = 0,
    SC_ERR_INVALID_ARGUMENT = 1,
    SC_ERR_SINGULAR_BASIS = 2,
    SC_ERR_CAPACITY_EXCEEDED = 3,
    SC_ERR_INJECTIVITY_FAILED = 4,
    SC_ERR_NOT_ADMISSIBLE = 5,
    SC_ERR_NON_SMOOTH_WEIGHT = 6,
    SC_ERR_QUADRATURE = 7,
    SC_ERR_NO_CANDIDATES = 8,
    SC_ERR_NULL_POINTER = 9,
    SC_ERR_PANIC = 10,
}

/// Validated cut-and-project scheme.
pub struct sc_scheme {
    inner: SchemeSpec,
}

/// Weight function on the internal space.
pub struct sc_weight {
    inner: WeightFunction,
}

/// Finite decoration attached to each lattice point.
pub struct sc_decoration {
    inner: Decoration,
}

/// Generated weighted comb on a box.
pub struct sc_comb {
    inner: WeightedComb,
}

/// Closed-form autocorrelation table.
pub struct sc_autocorr {
    inner: AutocorrelationTable,
}

/// Closed-form diffraction peak list.
pub struct sc_peaks {
    inner: PeakList,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("no interior nul");
    });
}

fn status_of(e: &Error) -> sc_status {
    match e {
        Error::SingularBasis { .. } => sc_status::SC_ERR_SINGULAR_BASIS,
        Error::CapacityExceeded { .. } => sc_status::SC_ERR_CAPACITY_EXCEEDED,
        Error::InjectivityFailed { .. } => sc_status::SC_ERR_INJECTIVITY_FAILED,
        Error::NotAdmissible { .. } => sc_status::SC_ERR_NOT_ADMISSIBLE,
        Error::NonSmoothWeight => sc_status::SC_ERR_NON_SMOOTH_WEIGHT,
        Error::QuadratureNotConverged { .. } => sc_status::SC_ERR_QUADRATURE,
        Error::NoCandidatesInRange => sc_status::SC_ERR_NO_CANDIDATES,
        Error::InvalidParameter(_) => sc_status::SC_ERR_INVALID_ARGUMENT,
    }
}

fn fail(e: Error) -> sc_status {
    let status = status_of(&e);
    set_error(&e.to_string());
    status
}

fn null_pointer(what: &str) -> sc_status {
    set_error(&format!("{what} is a null pointer"));
    sc_status::SC_ERR_NULL_POINTER
}

/// Run `body` with panics converted to `SC_ERR_PANIC`.
fn guard<F: FnOnce() -> sc_status>(body: F) -> sc_status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = if let Some(m) = payload.downcast_ref::<&str>() {
                (*m).to_string()
            } else if let Some(m) = payload.downcast_ref::<String>() {
                m.clone()
            } else {
                "opaque panic".to_string()
            };
            set_error(&format!("internal panic: {msg}"));
            sc_status::SC_ERR_PANIC
        }
    }
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn write_out<T>(ptr: *mut T, value: T) {
    if !ptr.is_null() {
        *ptr = value;
    }
}

/// Message for the most recent error on this thread.
///
/// The pointer stays valid until the next failing call on the same thread.
/// Never returns null; the message is empty if no error occurred yet.
///
/// # Safety
/// The returned pointer must not be freed or written through.
#[no_mangle]
pub unsafe extern "C" fn sc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Build and validate a cut-and-project scheme.
///
/// `basis_rows` is the row-major `(d+m) x (d+m)` basis matrix whose columns
/// generate the lattice; the first `d` coordinate rows are physical, the
/// remaining `m` internal. Validation enumerates lattice points up to
/// `search_radius` looking for an injectivity witness and scans internal
/// coverage at cell size `coverage_eps`; pass `0` and `0.0` for the defaults.
///
/// # Safety
/// `basis_rows` must point to `(d+m)*(d+m)` doubles and `out` must be a valid
/// location for a handle. On success `*out` owns the scheme and must be
/// released with [`sc_scheme_free`].
#[no_mangle]
pub unsafe extern "C" fn sc_scheme_new(
    d: usize,
    m: usize,
    basis_rows: *const f64,
    search_radius: i64,
    coverage_eps: f64,
    out: *mut *mut sc_scheme,
) -> sc_status {
    guard(|| {
        if out.is_null() {
            return null_pointer("out");
        }
        let n = d + m;
        let Some(rows) = slice_arg(basis_rows, n * n) else {
            return null_pointer("basis_rows");
        };
        let matrix: Vec<Vec<f64>> = rows.chunks(n).map(|r| r.to_vec()).collect();
        let basis = match LatticeBasis::from_rows(&matrix) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        let defaults = ValidationOptions::default();
        let opts = ValidationOptions {
            search_radius: if search_radius > 0 { search_radius } else { defaults.search_radius },
            coverage_eps: if coverage_eps > 0.0 { coverage_eps } else { defaults.coverage_eps },
        };
        match validate_scheme(d, m, basis, &opts) {
            Ok(scheme) => {
                *out = Box::into_raw(Box::new(sc_scheme { inner: scheme }));
                sc_status::SC_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a scheme handle. Null is ignored.
///
/// # Safety
/// `s` must be a handle from [`sc_scheme_new`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn sc_scheme_free(s: *mut sc_scheme) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Absolute determinant of the lattice basis (the covolume).
///
/// # Safety
/// `s` must be a live scheme handle and `out` a valid double location.
#[no_mangle]
pub unsafe extern "C" fn sc_scheme_det_abs(s: *const sc_scheme, out: *mut f64) -> sc_status {
    guard(|| {
        let Some(scheme) = s.as_ref() else {
            return null_pointer("scheme");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = scheme.inner.det_abs();
        sc_status::SC_OK
    })
}

/// Physical and internal dimensions of the scheme.
///
/// # Safety
/// `s` must be a live scheme handle; `d` and `m` may each be null to skip.
#[no_mangle]
pub unsafe extern "C" fn sc_scheme_dims(
    s: *const sc_scheme,
    d: *mut usize,
    m: *mut usize,
) -> sc_status {
    guard(|| {
        let Some(scheme) = s.as_ref() else {
            return null_pointer("scheme");
        };
        write_out(d, scheme.inner.d());
        write_out(m, scheme.inner.m());
        sc_status::SC_OK
    })
}

fn new_weight(
    out: *mut *mut sc_weight,
    built: Result<WeightFunction, Error>,
) -> sc_status {
    if out.is_null() {
        return null_pointer("out");
    }
    match built {
        Ok(w) => {
            unsafe { *out = Box::into_raw(Box::new(sc_weight { inner: w })) };
            sc_status::SC_OK
        }
        Err(e) => fail(e),
    }
}

/// Gaussian weight `exp(-pi |h/width|^2)` on `R^m`.
///
/// # Safety
/// `out` must be a valid location; on success `*out` must be released with
/// [`sc_weight_free`].
#[no_mangle]
pub unsafe extern "C" fn sc_weight_gaussian(
    m: usize,
    width: f64,
    out: *mut *mut sc_weight,
) -> sc_status {
    guard(|| new_weight(out, WeightFunction::gaussian(m, width)))
}

/// Smooth bump supported on the ball of the given radius.
///
/// # Safety
/// Same contract as [`sc_weight_gaussian`].
#[no_mangle]
pub unsafe extern "C" fn sc_weight_bump(
    m: usize,
    radius: f64,
    out: *mut *mut sc_weight,
) -> sc_status {
    guard(|| new_weight(out, WeightFunction::bump(m, radius)))
}

/// Smooth weight `(1 + |h|^2 / scale^2)^(-exponent/2)` with power-law decay.
///
/// # Safety
/// Same contract as [`sc_weight_gaussian`].
#[no_mangle]
pub unsafe extern "C" fn sc_weight_poly_decay(
    m: usize,
    exponent: f64,
    scale: f64,
    out: *mut *mut sc_weight,
) -> sc_status {
    guard(|| new_weight(out, WeightFunction::poly_decay(m, exponent, scale)))
}

/// Indicator of the box `[lo, hi]`; admitted only on density paths.
///
/// # Safety
/// `lo` and `hi` must point to `m` doubles; same handle contract as
/// [`sc_weight_gaussian`].
#[no_mangle]
pub unsafe extern "C" fn sc_weight_sharp_window(
    m: usize,
    lo: *const f64,
    hi: *const f64,
    out: *mut *mut sc_weight,
) -> sc_status {
    guard(|| {
        let (Some(lo), Some(hi)) = (slice_arg(lo, m), slice_arg(hi, m)) else {
            return null_pointer("lo/hi");
        };
        let window = match BoxRegion::new(lo.to_vec(), hi.to_vec()) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        new_weight(out, WeightFunction::sharp_window(window))
    })
}

/// Release a weight handle. Null is ignored.
///
/// # Safety
/// `w` must be a handle from a weight constructor not freed before.
#[no_mangle]
pub unsafe extern "C" fn sc_weight_free(w: *mut sc_weight) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Evaluate the weight at an internal point.
///
/// # Safety
/// `h` must point to `m` doubles matching the weight's dimension; `re` and
/// `im` may each be null to skip that component.
#[no_mangle]
pub unsafe extern "C" fn sc_weight_eval(
    w: *const sc_weight,
    h: *const f64,
    re: *mut f64,
    im: *mut f64,
) -> sc_status {
    guard(|| {
        let Some(weight) = w.as_ref() else {
            return null_pointer("weight");
        };
        let Some(h) = slice_arg(h, weight.inner.dim()) else {
            return null_pointer("h");
        };
        let v = weight.inner.eval(h);
        write_out(re, v.re);
        write_out(im, v.im);
        sc_status::SC_OK
    })
}

/// Internal truncation radius so the discarded comb tail stays below `eps`
/// after scaling by `volume_scale` (use the box volume of the planned comb).
///
/// # Safety
/// `w` and `s` must be live handles; `out` must be a valid double location.
#[no_mangle]
pub unsafe extern "C" fn sc_weight_truncation_radius(
    w: *const sc_weight,
    s: *const sc_scheme,
    eps: f64,
    volume_scale: f64,
    out: *mut f64,
) -> sc_status {
    guard(|| {
        let (Some(weight), Some(scheme)) = (w.as_ref(), s.as_ref()) else {
            return null_pointer("weight/scheme");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match weight.inner.truncation_radius(&scheme.inner, eps, volume_scale) {
            Ok(r) => {
                *out = r;
                sc_status::SC_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// The single-atom decoration: one unshifted atom of weight one.
///
/// # Safety
/// `s` must be a live scheme handle; on success `*out` must be released with
/// [`sc_decoration_free`].
#[no_mangle]
pub unsafe extern "C" fn sc_decoration_default(
    s: *const sc_scheme,
    out: *mut *mut sc_decoration,
) -> sc_status {
    guard(|| {
        let Some(scheme) = s.as_ref() else {
            return null_pointer("scheme");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let deco = Decoration::single_default(&scheme.inner);
        *out = Box::into_raw(Box::new(sc_decoration { inner: deco }));
        sc_status::SC_OK
    })
}

/// Decoration with `n_atoms` atoms: physical shifts `s[i*d .. i*d+d]`,
/// internal shifts `k[i*m .. i*m+m]`, complex weights `w[2*i], w[2*i+1]`.
///
/// # Safety
/// `s_shifts` must hold `n_atoms*d` doubles, `k_shifts` `n_atoms*m`, and
/// `weights` `2*n_atoms`; same handle contract as [`sc_decoration_default`].
#[no_mangle]
pub unsafe extern "C" fn sc_decoration_new(
    s: *const sc_scheme,
    n_atoms: usize,
    s_shifts: *const f64,
    k_shifts: *const f64,
    weights: *const f64,
    out: *mut *mut sc_decoration,
) -> sc_status {
    guard(|| {
        let Some(scheme) = s.as_ref() else {
            return null_pointer("scheme");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let d = scheme.inner.d();
        let m = scheme.inner.m();
        let (Some(sv), Some(kv), Some(wv)) = (
            slice_arg(s_shifts, n_atoms * d),
            slice_arg(k_shifts, n_atoms * m),
            slice_arg(weights, n_atoms * 2),
        ) else {
            return null_pointer("s_shifts/k_shifts/weights");
        };
        let atoms: Vec<DecorationAtom> = (0..n_atoms)
            .map(|i| DecorationAtom {
                shift_physical: sv[i * d..(i + 1) * d].to_vec(),
                shift_internal: kv[i * m..(i + 1) * m].to_vec(),
                weight: Complex64::new(wv[2 * i], wv[2 * i + 1]),
            })
            .collect();
        match Decoration::new(&scheme.inner, atoms) {
            Ok(deco) => {
                *out = Box::into_raw(Box::new(sc_decoration { inner: deco }));
                sc_status::SC_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a decoration handle. Null is ignored.
///
/// # Safety
/// `d` must be a handle from a decoration constructor not freed before.
#[no_mangle]
pub unsafe extern "C" fn sc_decoration_free(d: *mut sc_decoration) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Closed-form density of the comb (average weight per unit volume).
///
/// # Safety
/// All handles must be live; `re` and `im` may each be null to skip.
#[no_mangle]
pub unsafe extern "C" fn sc_density_closed(
    s: *const sc_scheme,
    w: *const sc_weight,
    deco: *const sc_decoration,
    quad_tol: f64,
    re: *mut f64,
    im: *mut f64,
) -> sc_status {
    guard(|| {
        let (Some(scheme), Some(weight), Some(dec)) = (s.as_ref(), w.as_ref(), deco.as_ref())
        else {
            return null_pointer("scheme/weight/decoration");
        };
        match density_closed(&scheme.inner, &weight.inner, &dec.inner, quad_tol) {
            Ok(v) => {
                write_out(re, v.re);
                write_out(im, v.im);
                sc_status::SC_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Generate the weighted comb on the box `[region_lo, region_hi]`.
///
/// The comb represents the hull element with representative
/// `(origin_s, origin_k)`; pass null for both to take the zero element.
///
/// # Safety
/// `region_lo`/`region_hi` must point to `d` doubles; `origin_s` to `d` and
/// `origin_k` to `m` doubles when non-null (null them together). On success
/// `*out` must be released with [`sc_comb_free`].
#[no_mangle]
pub unsafe extern "C" fn sc_comb_generate(
    s: *const sc_scheme,
    w: *const sc_weight,
    deco: *const sc_decoration,
    origin_s: *const f64,
    origin_k: *const f64,
    region_lo: *const f64,
    region_hi: *const f64,
    trunc_eps: f64,
    out: *mut *mut sc_comb,
) -> sc_status {
    guard(|| {
        let (Some(scheme), Some(weight), Some(dec)) = (s.as_ref(), w.as_ref(), deco.as_ref())
        else {
            return null_pointer("scheme/weight/decoration");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let d = scheme.inner.d();
        let m = scheme.inner.m();
        let (Some(lo), Some(hi)) = (slice_arg(region_lo, d), slice_arg(region_hi, d)) else {
            return null_pointer("region_lo/region_hi");
        };
        let region = match BoxRegion::new(lo.to_vec(), hi.to_vec()) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        let origin = match (slice_arg(origin_s, d), slice_arg(origin_k, m)) {
            (Some(sp), Some(kp)) => scheme.inner.torus_point(sp, kp),
            (None, None) => scheme.inner.torus_zero(),
            _ => {
                set_error("origin_s and origin_k must be both null or both set");
                return sc_status::SC_ERR_INVALID_ARGUMENT;
            }
        };
        match generate_comb(&scheme.inner, &weight.inner, &dec.inner, &origin, &region, trunc_eps)
        {
            Ok(comb) => {
                *out = Box::into_raw(Box::new(sc_comb { inner: comb }));
                sc_status::SC_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Release a comb handle. Null is ignored.
///
/// # Safety
/// `c` must be a handle from [`sc_comb_generate`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn sc_comb_free(c: *mut sc_comb) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of atoms in the comb.
///
/// # Safety
/// `c` must be a live comb handle and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn sc_comb_len(c: *const sc_comb, out: *mut usize) -> sc_status {
    guard(|| {
        let Some(comb) = c.as_ref() else {
            return null_pointer("comb");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = comb.inner.len();
        sc_status::SC_OK
    })
}

/// Copy out atom `idx`: its position (ascending order) and complex weight.
///
/// # Safety
/// `position` must point to `d` doubles when non-null; `w_re`/`w_im` may be
/// null to skip. `idx` past the end yields `SC_ERR_INVALID_ARGUMENT`.
#[no_mangle]
pub unsafe extern "C" fn sc_comb_atom(
    c: *const sc_comb,
    idx: usize,
    position: *mut f64,
    w_re: *mut f64,
    w_im: *mut f64,
) -> sc_status {
    guard(|| {
        let Some(comb) = c.as_ref() else {
            return null_pointer("comb");
        };
        let Some(atom) = comb.inner.atoms().get(idx) else {
            set_error(&format!("atom index {idx} out of range {}", comb.inner.len()));
            return sc_status::SC_ERR_INVALID_ARGUMENT;
        };
        if !position.is_null() {
            std::ptr::copy_nonoverlapping(
                atom.position.as_ptr(),
                position,
                atom.position.len(),
            );
        }
        write_out(w_re, atom.weight.re);
        write_out(w_im, atom.weight.im);
        sc_status::SC_OK
    })
}

/// Average weight of the comb per unit volume of its box.
///
/// # Safety
/// `c` must be a live comb handle; `re` and `im` may each be null to skip.
#[no_mangle]
pub unsafe extern "C" fn sc_weyl_average(
    c: *const sc_comb,
    re: *mut f64,
    im: *mut f64,
) -> sc_status {
    guard(|| {
        let Some(comb) = c.as_ref() else {
            return null_pointer("comb");
        };
        let v = weyl_average(&comb.inner);
        write_out(re, v.re);
        write_out(im, v.im);
        sc_status::SC_OK
    })
}

/// Fourier average of the comb at frequency `k` (length `d`).
///
/// # Safety
/// `c` must be a live comb handle and `k` point to `d` doubles.
#[no_mangle]
pub unsafe extern "C" fn sc_fourier_bohr(
    c: *const sc_comb,
    k: *const f64,
    re: *mut f64,
    im: *mut f64,
) -> sc_status {
    guard(|| {
        let Some(comb) = c.as_ref() else {
            return null_pointer("comb");
        };
        let Some(k) = slice_arg(k, comb.inner.d()) else {
            return null_pointer("k");
        };
        let v = fourier_bohr_estimate(&comb.inner, k);
        write_out(re, v.re);
        write_out(im, v.im);
        sc_status::SC_OK
    })
}

/// Closed-form autocorrelation on displacements in `[lo, hi]` (length `d`
/// each) with the given internal truncation.
///
/// # Safety
/// All handles must be live; on success `*out` must be released with
/// [`sc_autocorr_free`].
#[no_mangle]
pub unsafe extern "C" fn sc_autocorr_closed(
    s: *const sc_scheme,
    w: *const sc_weight,
    deco: *const sc_decoration,
    lo: *const f64,
    hi: *const f64,
    internal_cut: f64,
    quad_tol: f64,
    out: *mut *mut sc_autocorr,
) -> sc_status {
    guard(|| {
        let (Some(scheme), Some(weight), Some(dec)) = (s.as_ref(), w.as_ref(), deco.as_ref())
        else {
            return null_pointer("scheme/weight/decoration");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let d = scheme.inner.d();
        let (Some(lo), Some(hi)) = (slice_arg(lo, d), slice_arg(hi, d)) else {
            return null_pointer("lo/hi");
        };
        let range = match BoxRegion::new(lo.to_vec(), hi.to_vec()) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        match autocorr_closed(&scheme.inner, &weight.inner, &dec.inner, &range, internal_cut, quad_tol)
        {
            Ok(table) => {
                *out = Box::into_raw(Box::new(sc_autocorr { inner: table }));
                sc_status::SC_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of entries in the table (sorted by descending modulus).
///
/// # Safety
/// `t` must be a live table handle and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn sc_autocorr_len(t: *const sc_autocorr, out: *mut usize) -> sc_status {
    guard(|| {
        let Some(table) = t.as_ref() else {
            return null_pointer("table");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = table.inner.entries().len();
        sc_status::SC_OK
    })
}

/// Copy out entry `idx`: displacement (length `d`) and complex coefficient.
///
/// # Safety
/// `u` must point to `d` doubles when non-null; `re`/`im` may be null.
#[no_mangle]
pub unsafe extern "C" fn sc_autocorr_entry(
    t: *const sc_autocorr,
    idx: usize,
    u: *mut f64,
    re: *mut f64,
    im: *mut f64,
) -> sc_status {
    guard(|| {
        let Some(table) = t.as_ref() else {
            return null_pointer("table");
        };
        let Some(entry) = table.inner.entries().get(idx) else {
            set_error(&format!(
                "entry index {idx} out of range {}",
                table.inner.entries().len()
            ));
            return sc_status::SC_ERR_INVALID_ARGUMENT;
        };
        if !u.is_null() {
            std::ptr::copy_nonoverlapping(
                entry.displacement.as_ptr(),
                u,
                entry.displacement.len(),
            );
        }
        write_out(re, entry.coefficient.re);
        write_out(im, entry.coefficient.im);
        sc_status::SC_OK
    })
}

/// Release a table handle. Null is ignored.
///
/// # Safety
/// `t` must be a handle from [`sc_autocorr_closed`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn sc_autocorr_free(t: *mut sc_autocorr) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Closed-form diffraction peaks with frequency in `[k_lo, k_hi]` and
/// intensity above `intensity_floor`. Pass `internal_cut <= 0` to derive the
/// cut from the floor.
///
/// # Safety
/// All handles must be live; `k_lo`/`k_hi` must point to `d` doubles. On
/// success `*out` must be released with [`sc_peaks_free`].
#[no_mangle]
pub unsafe extern "C" fn sc_diffraction_peaks(
    s: *const sc_scheme,
    w: *const sc_weight,
    deco: *const sc_decoration,
    k_lo: *const f64,
    k_hi: *const f64,
    internal_cut: f64,
    intensity_floor: f64,
    quad_tol: f64,
    out: *mut *mut sc_peaks,
) -> sc_status {
    guard(|| {
        let (Some(scheme), Some(weight), Some(dec)) = (s.as_ref(), w.as_ref(), deco.as_ref())
        else {
            return null_pointer("scheme/weight/decoration");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let d = scheme.inner.d();
        let (Some(lo), Some(hi)) = (slice_arg(k_lo, d), slice_arg(k_hi, d)) else {
            return null_pointer("k_lo/k_hi");
        };
        let range = match BoxRegion::new(lo.to_vec(), hi.to_vec()) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        let cut = if internal_cut > 0.0 {
            internal_cut
        } else {
            match default_internal_cut(&scheme.inner, &weight.inner, &dec.inner, intensity_floor)
            {
                Ok(c) => c,
                Err(e) => return fail(e),
            }
        };
        match diffraction_peaks(
            &scheme.inner,
            &weight.inner,
            &dec.inner,
            &range,
            cut,
            intensity_floor,
            quad_tol,
        ) {
            Ok(peaks) => {
                *out = Box::into_raw(Box::new(sc_peaks { inner: peaks }));
                sc_status::SC_OK
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of peaks (sorted by descending intensity).
///
/// # Safety
/// `p` must be a live peak-list handle and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn sc_peaks_len(p: *const sc_peaks, out: *mut usize) -> sc_status {
    guard(|| {
        let Some(peaks) = p.as_ref() else {
            return null_pointer("peaks");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        *out = peaks.inner.peaks().len();
        sc_status::SC_OK
    })
}

/// Copy out peak `idx`: frequency `k` (length `d`), internal frequency `eta`
/// (length `m`), complex amplitude, and intensity.
///
/// # Safety
/// `k` must point to `d` and `eta` to `m` doubles when non-null; the scalar
/// outputs may each be null to skip.
#[no_mangle]
pub unsafe extern "C" fn sc_peaks_get(
    p: *const sc_peaks,
    idx: usize,
    k: *mut f64,
    eta: *mut f64,
    amp_re: *mut f64,
    amp_im: *mut f64,
    intensity: *mut f64,
) -> sc_status {
    guard(|| {
        let Some(peaks) = p.as_ref() else {
            return null_pointer("peaks");
        };
        let Some(peak) = peaks.inner.peaks().get(idx) else {
            set_error(&format!(
                "peak index {idx} out of range {}",
                peaks.inner.peaks().len()
            ));
            return sc_status::SC_ERR_INVALID_ARGUMENT;
        };
        if !k.is_null() {
            std::ptr::copy_nonoverlapping(peak.k.as_ptr(), k, peak.k.len());
        }
        if !eta.is_null() {
            std::ptr::copy_nonoverlapping(peak.eta.as_ptr(), eta, peak.eta.len());
        }
        write_out(amp_re, peak.amplitude.re);
        write_out(amp_im, peak.amplitude.im);
        write_out(intensity, peak.intensity);
        sc_status::SC_OK
    })
}

/// Release a peak-list handle. Null is ignored.
///
/// # Safety
/// `p` must be a handle from [`sc_diffraction_peaks`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn sc_peaks_free(p: *mut sc_peaks) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}
