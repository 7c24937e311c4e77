//! C ABI over the henlab core.
//!
//! Every entry point returns a [`HenlabStatus`] and writes results through
//! out-pointers. Maps and orbits are opaque handles owned by the caller and
//! released with the matching `_free` function. The message of the last
//! failure on the calling thread is available from
//! [`henlab_last_error_message`].

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use henlab::bifurcation::{analytic_curve, CurveId};
use henlab::orbits::{find_periodic, NewtonSettings, Orbit, OrbitClass};
use henlab::{CubicSign, Error, Family, MapSpec, Perturbation, Point};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HenlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Newton, continuation or another numerical procedure failed.
    Numerical = 3,
    /// The map is singular at the given point.
    Singular = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HenlabFamily {
    H3 = 0,
    H3Inverse = 1,
    CrossformSq = 2,
    Qr = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HenlabPerturbation {
    Xy = 0,
    XArctanY = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HenlabOrbitClass {
    Elliptic = 0,
    Sink = 1,
    Source = 2,
    SaddleContracting = 3,
    SaddleExpanding = 4,
    SaddleConservative = 5,
    Parabolic = 6,
    Unresolved = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HenlabCurve {
    P1 = 0,
    Pd1 = 1,
    L13 = 2,
}

/// Opaque map handle.
pub struct HenlabMap {
    spec: MapSpec,
}

/// Opaque periodic orbit handle.
pub struct HenlabOrbit {
    orbit: Orbit,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HenlabStatus {
    match e {
        Error::Invalid(_) | Error::Domain(_) => HenlabStatus::InvalidArgument,
        Error::SingularDenominator { .. } | Error::NonFinite => HenlabStatus::Singular,
        _ => HenlabStatus::Numerical,
    }
}

/// Runs `f`, recording its error message and turning panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (HenlabStatus, String)>) -> HenlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HenlabStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside henlab".into());
            HenlabStatus::Panic
        }
    }
}

fn core<T>(r: henlab::Result<T>) -> Result<T, (HenlabStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (HenlabStatus, String) {
    (HenlabStatus::NullPointer, format!("null pointer: {what}"))
}

/// # Safety
/// `p` is null or valid for reads of `T`.
unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, (HenlabStatus, String)> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn put<T>(p: *mut T, v: T, what: &str) -> Result<(), (HenlabStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { p.write(v) };
    Ok(())
}

fn sign(d: c_int) -> Result<CubicSign, (HenlabStatus, String)> {
    match d {
        1 => Ok(CubicSign::Plus),
        -1 => Ok(CubicSign::Minus),
        _ => Err((HenlabStatus::InvalidArgument, format!("d must be +1 or -1, got {d}"))),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn henlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn henlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Creates a validated map. `d` is `+1` or `-1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn henlab_map_new(
    family: HenlabFamily,
    perturbation: HenlabPerturbation,
    d: c_int,
    m1: f64,
    m2: f64,
    eps: f64,
    out: *mut *mut HenlabMap,
) -> HenlabStatus {
    guard(|| {
        let family = match family {
            HenlabFamily::H3 => Family::H3,
            HenlabFamily::H3Inverse => Family::H3Inverse,
            HenlabFamily::CrossformSq => Family::CrossformSq,
            HenlabFamily::Qr => Family::Qr,
        };
        let perturbation = match perturbation {
            HenlabPerturbation::Xy => Perturbation::Xy,
            HenlabPerturbation::XArctanY => Perturbation::XArctanY,
        };
        let spec = MapSpec::new(family, sign(d)?, m1, m2, eps).with_perturbation(perturbation);
        core(spec.validate())?;
        let h = Box::into_raw(Box::new(HenlabMap { spec }));
        unsafe { put(out, h, "out") }.inspect_err(|_| drop(unsafe { Box::from_raw(h) }))
    })
}

/// # Safety
/// `map` is null or a handle from [`henlab_map_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn henlab_map_free(map: *mut HenlabMap) {
    if !map.is_null() {
        drop(unsafe { Box::from_raw(map) });
    }
}

/// # Safety
/// `map` is a live handle; `out_x`, `out_y` are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn henlab_map_forward(
    map: *const HenlabMap,
    x: f64,
    y: f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> HenlabStatus {
    guard(|| {
        let m = unsafe { get(map, "map") }?;
        let p = core(m.spec.forward(Point::new(x, y)))?;
        unsafe { put(out_x, p.x, "out_x")? };
        unsafe { put(out_y, p.y, "out_y") }
    })
}

/// # Safety
/// As for [`henlab_map_forward`].
#[no_mangle]
pub unsafe extern "C" fn henlab_map_backward(
    map: *const HenlabMap,
    x: f64,
    y: f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> HenlabStatus {
    guard(|| {
        let m = unsafe { get(map, "map") }?;
        let p = core(m.spec.backward(Point::new(x, y)))?;
        unsafe { put(out_x, p.x, "out_x")? };
        unsafe { put(out_y, p.y, "out_y") }
    })
}

/// Jacobian matrix at `(x, y)`, row-major into `out[4]`.
///
/// # Safety
/// `map` is a live handle; `out` is valid for writes of four doubles.
#[no_mangle]
pub unsafe extern "C" fn henlab_map_jacobian(map: *const HenlabMap, x: f64, y: f64, out: *mut f64) -> HenlabStatus {
    guard(|| {
        let m = unsafe { get(map, "map") }?;
        let j = core(m.spec.jacobian(Point::new(x, y)))?;
        if out.is_null() {
            return Err(null("out"));
        }
        for (k, v) in [j.a, j.b, j.c, j.d].into_iter().enumerate() {
            unsafe { out.add(k).write(v) };
        }
        Ok(())
    })
}

/// Newton search for a period-`q` orbit from `(x0, y0)`.
///
/// # Safety
/// `map` is a live handle; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn henlab_orbit_find(
    map: *const HenlabMap,
    q: usize,
    x0: f64,
    y0: f64,
    out: *mut *mut HenlabOrbit,
) -> HenlabStatus {
    guard(|| {
        let m = unsafe { get(map, "map") }?;
        if q == 0 {
            return Err((HenlabStatus::InvalidArgument, "q must be positive".into()));
        }
        let orbit = core(find_periodic(&m.spec, q, Point::new(x0, y0), &NewtonSettings::default()))?;
        let h = Box::into_raw(Box::new(HenlabOrbit { orbit }));
        unsafe { put(out, h, "out") }.inspect_err(|_| drop(unsafe { Box::from_raw(h) }))
    })
}

/// # Safety
/// `orbit` is null or a handle from [`henlab_orbit_find`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn henlab_orbit_free(orbit: *mut HenlabOrbit) {
    if !orbit.is_null() {
        drop(unsafe { Box::from_raw(orbit) });
    }
}

/// Minimal period; 0 for a null handle.
///
/// # Safety
/// `orbit` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn henlab_orbit_period(orbit: *const HenlabOrbit) -> usize {
    unsafe { orbit.as_ref() }.map_or(0, |o| o.orbit.q)
}

/// Point `k` of the cycle, `0 <= k < period`.
///
/// # Safety
/// `orbit` is a live handle; `out_x`, `out_y` are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn henlab_orbit_point(
    orbit: *const HenlabOrbit,
    k: usize,
    out_x: *mut f64,
    out_y: *mut f64,
) -> HenlabStatus {
    guard(|| {
        let o = unsafe { get(orbit, "orbit") }?;
        let p = *o
            .orbit
            .points
            .get(k)
            .ok_or_else(|| (HenlabStatus::InvalidArgument, format!("point index {k} out of range")))?;
        unsafe { put(out_x, p.x, "out_x")? };
        unsafe { put(out_y, p.y, "out_y") }
    })
}

/// Multipliers as `[re0, im0, re1, im1]`, ordered by modulus, and the
/// Jacobian product of the cycle.
///
/// # Safety
/// `orbit` is a live handle; `multipliers` is valid for writes of four
/// doubles and `jacobian` for one.
#[no_mangle]
pub unsafe extern "C" fn henlab_orbit_spectrum(
    orbit: *const HenlabOrbit,
    multipliers: *mut f64,
    jacobian: *mut f64,
) -> HenlabStatus {
    guard(|| {
        let o = unsafe { get(orbit, "orbit") }?;
        if multipliers.is_null() {
            return Err(null("multipliers"));
        }
        let [a, b] = o.orbit.multipliers;
        for (k, v) in [a.re, a.im, b.re, b.im].into_iter().enumerate() {
            unsafe { multipliers.add(k).write(v) };
        }
        unsafe { put(jacobian, o.orbit.jacobian_product, "jacobian") }
    })
}

/// Stability class and whether the cycle is invariant under `(x, y) -> (y, x)`.
///
/// # Safety
/// `orbit` is a live handle; both out-pointers are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn henlab_orbit_class(
    orbit: *const HenlabOrbit,
    class: *mut HenlabOrbitClass,
    symmetric: *mut bool,
) -> HenlabStatus {
    guard(|| {
        let o = unsafe { get(orbit, "orbit") }?;
        let c = match o.orbit.class {
            OrbitClass::Elliptic => HenlabOrbitClass::Elliptic,
            OrbitClass::Sink => HenlabOrbitClass::Sink,
            OrbitClass::Source => HenlabOrbitClass::Source,
            OrbitClass::SaddleContracting => HenlabOrbitClass::SaddleContracting,
            OrbitClass::SaddleExpanding => HenlabOrbitClass::SaddleExpanding,
            OrbitClass::SaddleConservative => HenlabOrbitClass::SaddleConservative,
            OrbitClass::Parabolic => HenlabOrbitClass::Parabolic,
            OrbitClass::Unresolved => HenlabOrbitClass::Unresolved,
        };
        unsafe { put(class, c, "class")? };
        unsafe { put(symmetric, o.orbit.symmetric, "symmetric") }
    })
}

/// Closed-form `M1` values of a fixed-point curve of the conservative map
/// at `m2`. `*exists` is false where the curve does not reach `m2`; the
/// M1 outputs are then left untouched.
///
/// # Safety
/// All out-pointers are valid for writes.
#[no_mangle]
pub unsafe extern "C" fn henlab_curve_m1(
    curve: HenlabCurve,
    d: c_int,
    m2: f64,
    exists: *mut bool,
    m1_plus: *mut f64,
    m1_minus: *mut f64,
) -> HenlabStatus {
    guard(|| {
        let kind = match curve {
            HenlabCurve::P1 => CurveId::P1,
            HenlabCurve::Pd1 => CurveId::PD1,
            HenlabCurve::L13 => CurveId::L13,
        };
        let c = core(analytic_curve(kind, sign(d)?, m2))?;
        match (c.m1_plus, c.m1_minus) {
            (Some(a), Some(b)) => {
                unsafe { put(m1_plus, a, "m1_plus")? };
                unsafe { put(m1_minus, b, "m1_minus")? };
                unsafe { put(exists, true, "exists") }
            }
            _ => unsafe { put(exists, false, "exists") },
        }
    })
}

/// Parses a family name such as `qr` or `h3-inverse`.
///
/// # Safety
/// `name` is a valid NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn henlab_family_from_name(name: *const c_char, out: *mut HenlabFamily) -> HenlabStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        let s = unsafe { CStr::from_ptr(name) }.to_string_lossy();
        let f: Family = core(s.parse())?;
        let v = match f {
            Family::H3 => HenlabFamily::H3,
            Family::H3Inverse => HenlabFamily::H3Inverse,
            Family::CrossformSq => HenlabFamily::CrossformSq,
            Family::Qr => HenlabFamily::Qr,
        };
        unsafe { put(out, v, "out") }
    })
}
