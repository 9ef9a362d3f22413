//! C ABI for `posmap`.
//!
//! Operators cross the boundary as opaque `PosmapOperator` handles built
//! from interleaved `(re, im)` doubles in row-major order. Every fallible
//! call returns a `PosmapStatus`; the message of the most recent failure on
//! the calling thread is available from `posmap_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use posmap::entangle::ppt_check;
use posmap::positivity::{is_block_positive, is_cp, SearchParams};
use posmap::tensornorms::{alpha_norm, pi_norm, AlphaParams, PiParams};
use posmap::verdict::Status;
use posmap::{random, rn, BipartiteOperator, CMatrix, Error, QMap, TensorElement};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosmapStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotHermitian = 4,
    NotPsd = 5,
    NotCp = 6,
    NotAState = 7,
    NotAbsolutelyContinuous = 8,
    RouteDisagreement = 9,
    Panic = 10,
}

/// Outcome of a property test.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosmapVerdict {
    CertifiedYes = 0,
    CertifiedNo = 1,
    NoViolationFound = 2,
    Inconclusive = 3,
}

impl From<Status> for PosmapVerdict {
    fn from(s: Status) -> Self {
        match s {
            Status::CertifiedYes => PosmapVerdict::CertifiedYes,
            Status::CertifiedNo => PosmapVerdict::CertifiedNo,
            Status::NoViolationFound => PosmapVerdict::NoViolationFound,
            Status::Inconclusive => PosmapVerdict::Inconclusive,
        }
    }
}

/// Opaque bipartite operator on `C^d1 (x) C^d2`.
pub struct PosmapOperator {
    inner: BipartiteOperator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PosmapStatus {
    match e {
        Error::NotHermitian { .. } => PosmapStatus::NotHermitian,
        Error::NotPsd { .. } => PosmapStatus::NotPsd,
        Error::NotCp { .. } => PosmapStatus::NotCp,
        Error::NotAState(_) => PosmapStatus::NotAState,
        Error::DimensionMismatch(_) | Error::InvalidSelector(_) => PosmapStatus::DimensionMismatch,
        Error::InvalidArgument(_) => PosmapStatus::InvalidArgument,
        Error::NotAbsolutelyContinuous { .. } => PosmapStatus::NotAbsolutelyContinuous,
        Error::RouteDisagreement(_) => PosmapStatus::RouteDisagreement,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PosmapStatus>) -> PosmapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PosmapStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            PosmapStatus::Panic
        }
    }
}

fn lift<T>(r: posmap::Result<T>) -> Result<T, PosmapStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null() -> PosmapStatus {
    set_error("null pointer argument".into());
    PosmapStatus::NullPointer
}

unsafe fn operator<'a>(h: *const PosmapOperator) -> Result<&'a BipartiteOperator, PosmapStatus> {
    // SAFETY: caller passes a live handle from this library or null.
    unsafe { h.as_ref() }.map(|h| &h.inner).ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), PosmapStatus> {
    if out.is_null() {
        return Err(null());
    }
    // SAFETY: non-null and caller guarantees it is writable.
    unsafe { out.write(v) };
    Ok(())
}

fn boxed(b: BipartiteOperator) -> *mut PosmapOperator {
    Box::into_raw(Box::new(PosmapOperator { inner: b }))
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn posmap_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds an operator of size `(d1*d2) x (d1*d2)` from `2*(d1*d2)^2`
/// interleaved doubles.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn posmap_operator_new(
    d1: usize,
    d2: usize,
    data: *const f64,
    len: usize,
    out: *mut *mut PosmapOperator,
) -> PosmapStatus {
    guard(|| {
        if data.is_null() {
            return Err(null());
        }
        let n = d1 * d2;
        if len != 2 * n * n {
            set_error(format!("expected {} doubles for a {n}x{n} operator, got {len}", 2 * n * n));
            return Err(PosmapStatus::DimensionMismatch);
        }
        // SAFETY: caller guarantees `len` readable doubles.
        let raw = unsafe { std::slice::from_raw_parts(data, len) };
        let entries = raw.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let m = lift(CMatrix::new(n, n, entries))?;
        let b = lift(BipartiteOperator::new(m, d1, d2))?;
        unsafe { write(out, boxed(b)) }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn posmap_operator_free(h: *mut PosmapOperator) {
    if !h.is_null() {
        // SAFETY: handle was created by `Box::into_raw`.
        drop(unsafe { Box::from_raw(h) });
    }
}

/// Factor dimensions of a handle.
///
/// # Safety
/// `h` must be a live handle; `d1` and `d2` must be writable.
#[no_mangle]
pub unsafe extern "C" fn posmap_operator_dims(h: *const PosmapOperator, d1: *mut usize, d2: *mut usize) -> PosmapStatus {
    guard(|| {
        let b = unsafe { operator(h) }?;
        unsafe {
            write(d1, b.d1())?;
            write(d2, b.d2())
        }
    })
}

/// Copies the entries as interleaved doubles into `buf` of length `len`.
///
/// # Safety
/// `h` must be a live handle and `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn posmap_operator_data(h: *const PosmapOperator, buf: *mut f64, len: usize) -> PosmapStatus {
    guard(|| {
        let b = unsafe { operator(h) }?;
        let data = b.mat().data();
        if buf.is_null() {
            return Err(null());
        }
        if len != 2 * data.len() {
            set_error(format!("buffer needs {} doubles", 2 * data.len()));
            return Err(PosmapStatus::DimensionMismatch);
        }
        // SAFETY: caller guarantees `len` writable doubles.
        let out = unsafe { std::slice::from_raw_parts_mut(buf, len) };
        for (pair, z) in out.chunks_exact_mut(2).zip(data) {
            pair[0] = z.re;
            pair[1] = z.im;
        }
        Ok(())
    })
}

/// Seeded random density matrix on `C^d1 (x) C^d2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn posmap_random_state(seed: u64, d1: usize, d2: usize, out: *mut *mut PosmapOperator) -> PosmapStatus {
    guard(|| {
        let b = lift(random::make_random_state(seed, d1, d2))?;
        unsafe { write(out, boxed(b)) }
    })
}

/// Werner state on `C^d (x) C^d` with antisymmetric weight `p`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn posmap_werner(d: usize, p: f64, out: *mut *mut PosmapOperator) -> PosmapStatus {
    guard(|| {
        let b = lift(random::werner(d, p))?;
        unsafe { write(out, boxed(b)) }
    })
}

/// Complete positivity of the map whose Choi matrix is `choi`. `value` is
/// the smallest Choi eigenvalue.
///
/// # Safety
/// `choi` must be a live handle; `verdict` and `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn posmap_is_cp(
    choi: *const PosmapOperator,
    tol: f64,
    verdict: *mut PosmapVerdict,
    value: *mut f64,
) -> PosmapStatus {
    guard(|| {
        let c = unsafe { operator(choi) }?;
        let v = lift(is_cp(c, tol))?;
        unsafe {
            write(verdict, v.status.into())?;
            write(value, v.value)
        }
    })
}

/// Block positivity by seeded product-vector search. `value` is the least
/// product expectation found.
///
/// # Safety
/// `choi` must be a live handle; `verdict` and `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn posmap_is_block_positive(
    choi: *const PosmapOperator,
    tol: f64,
    restarts: usize,
    seed: u64,
    verdict: *mut PosmapVerdict,
    value: *mut f64,
) -> PosmapStatus {
    guard(|| {
        let c = unsafe { operator(choi) }?;
        let params = SearchParams {
            restarts,
            seed,
            ..SearchParams::default()
        };
        let v = lift(is_block_positive(c, tol, &params))?;
        unsafe {
            write(verdict, v.status.into())?;
            write(value, v.value)
        }
    })
}

/// PPT test of a state. `min_eig` is the smallest partial-transpose
/// eigenvalue.
///
/// # Safety
/// `state` must be a live handle; `ppt` and `min_eig` must be writable.
#[no_mangle]
pub unsafe extern "C" fn posmap_ppt_check(
    state: *const PosmapOperator,
    tol: f64,
    ppt: *mut bool,
    min_eig: *mut f64,
) -> PosmapStatus {
    guard(|| {
        let rho = unsafe { operator(state) }?;
        let r = lift(ppt_check(rho, tol))?;
        unsafe {
            write(ppt, r.ppt)?;
            write(min_eig, r.route_a_min_eig)
        }
    })
}

/// Certified interval for the α norm (square factors only).
///
/// # Safety
/// `h` must be a live handle; `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn posmap_alpha_norm(
    h: *const PosmapOperator,
    seed: u64,
    lower: *mut f64,
    upper: *mut f64,
) -> PosmapStatus {
    guard(|| {
        let b = unsafe { operator(h) }?;
        let params = AlphaParams {
            seed,
            ..AlphaParams::default()
        };
        let e = lift(alpha_norm(b, &params))?;
        unsafe {
            write(lower, e.lower)?;
            write(upper, e.upper)
        }
    })
}

/// Certified interval for the projective norm. `r_max == 0` selects the
/// default term budget.
///
/// # Safety
/// `h` must be a live handle; `lower` and `upper` must be writable.
#[no_mangle]
pub unsafe extern "C" fn posmap_pi_norm(
    h: *const PosmapOperator,
    r_max: usize,
    seed: u64,
    lower: *mut f64,
    upper: *mut f64,
) -> PosmapStatus {
    guard(|| {
        let b = unsafe { operator(h) }?;
        let params = PiParams {
            r_max: (r_max > 0).then_some(r_max),
            seed,
            ..PiParams::default()
        };
        let e = lift(pi_norm(&TensorElement::from_operator(b), &params))?;
        unsafe {
            write(lower, e.lower)?;
            write(upper, e.upper)
        }
    })
}

/// Radon-Nikodym derivative `D` of `phi` with respect to `psi`, both given
/// by Choi matrices with `d1 = din`, `d2 = dout`.
///
/// # Safety
/// `phi` and `psi` must be live handles; `out` and `residual` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn posmap_rn_derivative(
    phi: *const PosmapOperator,
    psi: *const PosmapOperator,
    tol: f64,
    out: *mut *mut PosmapOperator,
    residual: *mut f64,
) -> PosmapStatus {
    guard(|| {
        let phi = QMap::from_choi(unsafe { operator(phi) }?.clone());
        let psi = QMap::from_choi(unsafe { operator(psi) }?.clone());
        let r = lift(rn::rn_derivative(&phi, &psi, tol))?;
        let d = lift(BipartiteOperator::new(r.d, phi.din(), phi.dout()))?;
        unsafe {
            write(residual, r.reconstruction_residual)?;
            write(out, boxed(d))
        }
    })
}
