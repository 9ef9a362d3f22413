use std::ffi::CStr;
use std::ptr;

use posmap_ffi::*;

fn new_op(d1: usize, d2: usize, data: &[f64]) -> *mut PosmapOperator {
    let mut h = ptr::null_mut();
    let s = unsafe { posmap_operator_new(d1, d2, data.as_ptr(), data.len(), &mut h) };
    assert_eq!(s, PosmapStatus::Ok);
    h
}

/// Interleaved entries of a real matrix.
fn interleave(real: &[f64]) -> Vec<f64> {
    real.iter().flat_map(|&x| [x, 0.0]).collect()
}

fn swap4() -> Vec<f64> {
    let mut m = vec![0.0; 16];
    for i in 0..2 {
        for j in 0..2 {
            m[(i * 2 + j) * 4 + (j * 2 + i)] = 1.0;
        }
    }
    interleave(&m)
}

#[test]
fn round_trip_and_dims() {
    let data = swap4();
    let h = new_op(2, 2, &data);
    let (mut d1, mut d2) = (0, 0);
    assert_eq!(unsafe { posmap_operator_dims(h, &mut d1, &mut d2) }, PosmapStatus::Ok);
    assert_eq!((d1, d2), (2, 2));
    let mut back = vec![0.0; 32];
    assert_eq!(unsafe { posmap_operator_data(h, back.as_mut_ptr(), back.len()) }, PosmapStatus::Ok);
    assert_eq!(back, data);
    unsafe { posmap_operator_free(h) };
}

#[test]
fn swap_is_not_cp_but_block_positive() {
    let h = new_op(2, 2, &swap4());
    let mut verdict = PosmapVerdict::Inconclusive;
    let mut value = 0.0;
    assert_eq!(unsafe { posmap_is_cp(h, 1e-12, &mut verdict, &mut value) }, PosmapStatus::Ok);
    assert_eq!(verdict, PosmapVerdict::CertifiedNo);
    assert!((value + 1.0).abs() < 1e-12);
    assert_eq!(
        unsafe { posmap_is_block_positive(h, 1e-9, 16, 0, &mut verdict, &mut value) },
        PosmapStatus::Ok
    );
    assert_eq!(verdict, PosmapVerdict::NoViolationFound);
    unsafe { posmap_operator_free(h) };
}

#[test]
fn werner_ppt_threshold() {
    for (p, expect) in [(0.25, true), (0.5, false)] {
        let mut h = ptr::null_mut();
        assert_eq!(unsafe { posmap_werner(2, p, &mut h) }, PosmapStatus::Ok);
        let mut ppt = !expect;
        let mut min_eig = 0.0;
        assert_eq!(unsafe { posmap_ppt_check(h, 1e-10, &mut ppt, &mut min_eig) }, PosmapStatus::Ok);
        assert_eq!(ppt, expect);
        assert!((min_eig - (1.0 - 3.0 * p) / 4.0).abs() < 1e-10);
        unsafe { posmap_operator_free(h) };
    }
}

#[test]
fn norms_of_identity_choi() {
    // Choi of the identity map is n |Omega><Omega| with entries E_ij (x) E_ij.
    let mut m = vec![0.0; 16];
    for i in 0..2 {
        for j in 0..2 {
            m[(i * 2 + i) * 4 + (j * 2 + j)] = 1.0;
        }
    }
    let h = new_op(2, 2, &interleave(&m));
    let (mut lo, mut hi) = (0.0, 0.0);
    assert_eq!(unsafe { posmap_alpha_norm(h, 0, &mut lo, &mut hi) }, PosmapStatus::Ok);
    assert!(lo <= 1.0 + 1e-9 && 1.0 <= hi + 1e-9);
    unsafe { posmap_operator_free(h) };

    let mut id = vec![0.0; 16];
    for i in 0..4 {
        id[i * 5] = 1.0;
    }
    let h = new_op(2, 2, &interleave(&id));
    assert_eq!(unsafe { posmap_pi_norm(h, 0, 0, &mut lo, &mut hi) }, PosmapStatus::Ok);
    assert!((lo - 2.0).abs() < 1e-6 && (hi - 2.0).abs() < 1e-6);
    unsafe { posmap_operator_free(h) };
}

#[test]
fn rn_scaling() {
    let mut psi = ptr::null_mut();
    assert_eq!(unsafe { posmap_random_state(7, 2, 2, &mut psi) }, PosmapStatus::Ok);
    let mut data = vec![0.0; 32];
    unsafe { posmap_operator_data(psi, data.as_mut_ptr(), 32) };
    let half: Vec<f64> = data.iter().map(|x| 0.5 * x).collect();
    let phi = new_op(2, 2, &half);
    let mut d = ptr::null_mut();
    let mut residual = 1.0;
    assert_eq!(unsafe { posmap_rn_derivative(phi, psi, 1e-10, &mut d, &mut residual) }, PosmapStatus::Ok);
    assert!(residual < 1e-10);
    // A full-rank psi has support projector I, so D = I / 2.
    let mut out = vec![0.0; 32];
    unsafe { posmap_operator_data(d, out.as_mut_ptr(), 32) };
    for r in 0..4 {
        for c in 0..4 {
            let want = if r == c { 0.5 } else { 0.0 };
            assert!((out[2 * (r * 4 + c)] - want).abs() < 1e-9);
            assert!(out[2 * (r * 4 + c) + 1].abs() < 1e-9);
        }
    }
    for h in [psi, phi, d] {
        unsafe { posmap_operator_free(h) };
    }
}

#[test]
fn error_codes() {
    let mut h = ptr::null_mut();
    let data = [0.0; 6];
    let s = unsafe { posmap_operator_new(2, 2, data.as_ptr(), data.len(), &mut h) };
    assert_eq!(s, PosmapStatus::DimensionMismatch);
    assert!(h.is_null());
    let msg = unsafe { CStr::from_ptr(posmap_last_error()) }.to_str().unwrap();
    assert!(msg.contains("32"));

    let s = unsafe { posmap_operator_new(2, 2, ptr::null(), 32, &mut h) };
    assert_eq!(s, PosmapStatus::NullPointer);

    let mut v = PosmapVerdict::Inconclusive;
    let mut x = 0.0;
    assert_eq!(unsafe { posmap_is_cp(ptr::null(), 1e-9, &mut v, &mut x) }, PosmapStatus::NullPointer);

    assert_eq!(unsafe { posmap_werner(2, 1.5, &mut h) }, PosmapStatus::InvalidArgument);

    // A non-state fails the PPT entry point.
    let neg = new_op(2, 2, &interleave(&[-1.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 1.0]));
    let mut ppt = false;
    assert_eq!(unsafe { posmap_ppt_check(neg, 1e-10, &mut ppt, &mut x) }, PosmapStatus::NotAState);
    unsafe { posmap_operator_free(neg) };
    unsafe { posmap_operator_free(ptr::null_mut()) };
}

#[test]
fn header_is_generated() {
    let header = include_str!("../include/posmap.h");
    for name in ["posmap_operator_new", "posmap_rn_derivative", "POSMAP_STATUS_NOT_A_STATE", "typedef struct PosmapOperator"] {
        assert!(header.contains(name), "{name}");
    }
}
