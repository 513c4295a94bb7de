use std::ffi::{c_void, CStr, CString};
use std::ptr;

use powertower_ffi::*;

fn last_error() -> String {
    let p = pt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn rule(v: &PtVerdict) -> &'static str {
    unsafe { CStr::from_ptr(v.rule) }.to_str().unwrap()
}

#[test]
fn scalar_functions() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(pt_lambert_w0(std::f64::consts::E, &mut v), PtStatus::PtOk);
        assert!((v - 1.0).abs() < 1e-14);
        assert_eq!(pt_tower_limit_c(0.5, &mut v), PtStatus::PtOk);
        assert!((0.5f64.powf(v) - v).abs() < 1e-14);
        assert_eq!(pt_g_boundary(0.5, &mut v), PtStatus::PtOk);
        assert_eq!(v, 0.5);
        let mut n = 0u64;
        assert_eq!(pt_log_star(16.0, &mut n), PtStatus::PtOk);
        assert_eq!(n, 3);
        assert_eq!(pt_log_star(-2.0, &mut n), PtStatus::PtOk);
        assert_eq!(n, 0);
        assert_eq!(pt_log_star(f64::NAN, &mut n), PtStatus::PtErrDomain);
    }
}

#[test]
fn errors_carry_messages() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(pt_tower_limit_c(2.0, &mut v), PtStatus::PtErrDomain);
        assert!(last_error().contains("(0,1]"));
        assert_eq!(pt_g_boundary(0.5, ptr::null_mut()), PtStatus::PtErrNullPointer);
        assert!(last_error().contains("out_value"));
    }
}

#[test]
fn classification() {
    let mut v = PtVerdict { outcome: PtOutcome::PtIndeterminate, rule: ptr::null() };
    unsafe {
        assert_eq!(pt_classify_bounds(1.2, 1.4, &mut v), PtStatus::PtOk);
        assert_eq!(v.outcome, PtOutcome::PtConvergesAs);
        assert_eq!(rule(&v), "Thm1-case1");
        assert_eq!(pt_classify_bounds(2.0, 1.0, &mut v), PtStatus::PtErrInvalidBounds);
    }
}

#[test]
fn distribution_handles() {
    let json = CString::new(r#"{"family":"uniform","params":{"lo":1,"hi":2}}"#).unwrap();
    let mut d: *mut PtDist = ptr::null_mut();
    unsafe {
        assert_eq!(pt_dist_from_json(json.as_ptr(), &mut d), PtStatus::PtOk);
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(pt_dist_support(d, &mut a, &mut b), PtStatus::PtOk);
        assert_eq!((a, b), (1.0, 2.0));
        let mut v = PtVerdict { outcome: PtOutcome::PtIndeterminate, rule: ptr::null() };
        assert_eq!(pt_dist_classify(d, &mut v), PtStatus::PtOk);
        assert_eq!(v.outcome, PtOutcome::PtDivergesToInfinityAs);

        let (mut mean, mut se, mut cens) = (0.0, 0.0, 0.0);
        assert_eq!(pt_dist_stopping_time(d, 100, 1000, 1, &mut mean, &mut se, &mut cens), PtStatus::PtOk);
        assert!(cens > 0.4 && mean > 1.0 && se > 0.0);
        assert_eq!(
            pt_dist_oscillation_gap(d, 10, 10, 1, &mut mean, &mut se, &mut cens),
            PtStatus::PtErrPrecondition
        );
        pt_dist_free(d);
    }

    let bad = CString::new(r#"{"family":"uniform","params":{"lo":2,"hi":1}}"#).unwrap();
    let mut d: *mut PtDist = ptr::null_mut();
    unsafe {
        assert_eq!(pt_dist_from_json(bad.as_ptr(), &mut d), PtStatus::PtErrInvalidSpec);
        assert!(d.is_null());
        pt_dist_free(d);
    }
}

#[test]
fn sampling_is_reproducible() {
    let json = CString::new(r#"{"family":"product_uniform","params":{}}"#).unwrap();
    let mut d: *mut PtDist = ptr::null_mut();
    let mut x = vec![0.0; 64];
    let mut y = vec![0.0; 64];
    unsafe {
        assert_eq!(pt_dist_from_json(json.as_ptr(), &mut d), PtStatus::PtOk);
        assert_eq!(pt_dist_sample_towers(d, 20, 64, 9, true, x.as_mut_ptr()), PtStatus::PtOk);
        assert_eq!(pt_dist_sample_towers(d, 20, 64, 9, true, y.as_mut_ptr()), PtStatus::PtOk);
        assert_eq!(pt_dist_sample_towers(d, 0, 64, 9, true, y.as_mut_ptr()), PtStatus::PtErrPrecondition);
        pt_dist_free(d);
    }
    assert_eq!(x, y);
    assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
}

extern "C" fn unit_cdf(x: f64, _ctx: *mut c_void) -> f64 {
    x.clamp(0.0, 1.0)
}

extern "C" fn scaled_cdf(x: f64, ctx: *mut c_void) -> f64 {
    let s = unsafe { *(ctx as *const f64) };
    (x / s).clamp(0.0, 1.0)
}

#[test]
fn ks_with_callbacks() {
    let xs: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let (mut d, mut p) = (0.0, 0.0);
    unsafe {
        let st = pt_ks_one_sample(xs.as_ptr(), xs.len(), Some(unit_cdf), ptr::null_mut(), &mut d, &mut p);
        assert_eq!(st, PtStatus::PtOk);
        assert!((d - 0.1).abs() < 1e-15);
        let mut scale = 2.0f64;
        let ctx = &mut scale as *mut f64 as *mut c_void;
        assert_eq!(pt_ks_one_sample(xs.as_ptr(), xs.len(), Some(scaled_cdf), ctx, &mut d, &mut p), PtStatus::PtOk);
        assert!(d > 0.4);
        let st = pt_ks_one_sample(xs.as_ptr(), 3, Some(unit_cdf), ptr::null_mut(), &mut d, &mut p);
        assert_eq!(st, PtStatus::PtErrInsufficientSamples);
        let st = pt_ks_one_sample(xs.as_ptr(), xs.len(), None, ptr::null_mut(), &mut d, &mut p);
        assert_eq!(st, PtStatus::PtErrNullPointer);
    }
}

#[test]
fn inverse_tower_handles() {
    let mut h: *mut PtInvTower = ptr::null_mut();
    let mut v = 0.0;
    let mut ok = false;
    unsafe {
        assert_eq!(pt_invtower_new(0.5, 2.0, 0.3, &mut h), PtStatus::PtOk);
        assert_eq!(pt_invtower_cdf(h, 1.0, &mut v), PtStatus::PtOk);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(pt_invtower_quantile(h, v, &mut v), PtStatus::PtOk);
        assert_eq!(v, 1.0);
        assert_eq!(pt_invtower_quantile(h, 1.5, &mut v), PtStatus::PtErrDomain);
        pt_invtower_free(h);

        assert_eq!(pt_invtower_feasible(0.5, 2.0, 0.7, &mut ok), PtStatus::PtOk);
        assert!(!ok);
        let mut h: *mut PtInvTower = ptr::null_mut();
        assert_eq!(pt_invtower_new(0.5, 2.0, 0.7, &mut h), PtStatus::PtErrInfeasible);
        assert!(h.is_null());
        assert!(last_error().contains("exceeds"));
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(pt_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
