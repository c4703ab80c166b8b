use std::ffi::{c_char, CString};
use std::ptr;

use aniso_plap_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { ap_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&b| b as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn pi_p_matches_closed_form() {
    let mut v = 0.0;
    assert_eq!(unsafe { ap_pi_p(2.0, &mut v) }, ApStatus::Ok);
    assert!((v - std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(unsafe { ap_pi_p(1.0, &mut v) }, ApStatus::InvalidArgument);
    assert!(!last_error().is_empty());
}

#[test]
fn eigen_round_trip() {
    let (d, n) = (c("rect:1,1"), c("lq:2"));
    let mut e = ptr::null_mut();
    let s = unsafe { ap_eigen_solve(d.as_ptr(), n.as_ptr(), 2.0, 1.0 / 32.0, 1e-8, &mut e) };
    assert_eq!(s, ApStatus::Ok, "{}", last_error());
    let mut sum = ApEigenSummary::default();
    let mut grid = ApGrid::default();
    unsafe {
        assert_eq!(ap_eigen_summary(e, &mut sum), ApStatus::Ok);
        assert_eq!(ap_eigen_grid(e, &mut grid), ApStatus::Ok);
    }
    let exact = std::f64::consts::PI.powi(2) / 2.0;
    assert!((sum.lambda - exact).abs() < 0.01 * exact, "{}", sum.lambda);
    assert_eq!(grid.h, 1.0 / 32.0);
    let len = grid.nx * grid.ny;
    let mut values = vec![0.0; len];
    unsafe {
        assert_eq!(ap_eigen_values(e, values.as_mut_ptr(), len - 1), ApStatus::BufferTooSmall);
        assert_eq!(ap_eigen_values(e, values.as_mut_ptr(), len), ApStatus::Ok);
        ap_eigen_free(e);
    }
    let max = values.iter().cloned().fold(0.0, f64::max);
    assert!((max - 1.0).abs() < 1e-12);
    assert!(values.iter().all(|&v| v >= 0.0));
}

#[test]
fn torsion_on_wulff_disk() {
    let (d, n) = (c("wulff:1,256"), c("lq:2"));
    let mut t = ptr::null_mut();
    let s = unsafe { ap_torsion_solve(d.as_ptr(), n.as_ptr(), 2.0, 0.0, 1e-8, &mut t) };
    assert_eq!(s, ApStatus::Ok, "{}", last_error());
    let mut sum = ApTorsionSummary::default();
    let mut grid = ApGrid::default();
    unsafe {
        assert_eq!(ap_torsion_summary(t, &mut sum), ApStatus::Ok);
        assert_eq!(ap_torsion_grid(t, &mut grid), ApStatus::Ok);
        let mut values = vec![0.0; grid.nx * grid.ny];
        assert_eq!(ap_torsion_values(t, values.as_mut_ptr(), values.len()), ApStatus::Ok);
        ap_torsion_free(t);
    }
    assert!((sum.max - 0.25).abs() < 0.01 * 0.25, "{}", sum.max);
}

#[test]
fn cheeger_of_unit_square() {
    let (d, n) = (c("rect:0.5,0.5"), c("lq:2"));
    let mut out = ApCheeger::default();
    assert_eq!(unsafe { ap_cheeger(d.as_ptr(), n.as_ptr(), 64, &mut out) }, ApStatus::Ok);
    let exact = 2.0 + std::f64::consts::PI.sqrt();
    assert!((out.h_est - exact).abs() < 1e-6 * exact);
    assert!(out.lower <= out.h_est && out.h_est <= out.upper);
    assert_eq!(out.fallback, 0);
}

#[test]
fn errors_are_reported() {
    let n = c("lq:2");
    let mut e = ptr::null_mut();
    unsafe {
        assert_eq!(ap_eigen_solve(ptr::null(), n.as_ptr(), 2.0, 0.0, 1e-8, &mut e), ApStatus::NullPointer);
        let bad = c("rect:1");
        assert_eq!(ap_eigen_solve(bad.as_ptr(), n.as_ptr(), 2.0, 0.0, 1e-8, &mut e), ApStatus::Parse);
        let sq = c("rect:1,1");
        assert_eq!(ap_eigen_solve(sq.as_ptr(), n.as_ptr(), 0.5, 0.0, 1e-8, &mut e), ApStatus::InvalidArgument);
        assert_eq!(ap_eigen_solve(sq.as_ptr(), n.as_ptr(), 2.0, 0.5, 1e-8, &mut e), ApStatus::GridTooCoarse);
        let invalid = [0xffu8 as c_char, 0];
        assert_eq!(ap_eigen_solve(invalid.as_ptr(), n.as_ptr(), 2.0, 0.0, 1e-8, &mut e), ApStatus::InvalidUtf8);
        assert!(e.is_null());
        ap_eigen_free(ptr::null_mut());
        let mut sum = ApEigenSummary::default();
        assert_eq!(ap_eigen_summary(ptr::null(), &mut sum), ApStatus::NullPointer);
    }
    let msg = last_error();
    assert!(msg.contains("null"), "{msg}");
    assert!(unsafe { ap_last_error(ptr::null_mut(), 0) } > 0);
}
