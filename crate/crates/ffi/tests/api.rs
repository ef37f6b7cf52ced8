use std::ffi::{CStr, CString};
use std::ptr;

use pldist_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = pld_last_error();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { pld_string_free(p) };
    s
}

#[test]
fn instance_round_trip_and_population_distortion() {
    let u = [1.0, 0.6, 0.0];
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(pld_instance_single(3.0, u.as_ptr(), 3, &mut inst), PldStatus::Ok);
        assert_eq!(pld_instance_num_candidates(inst), 3);
        let mut json = ptr::null_mut();
        assert_eq!(pld_instance_to_json(inst, &mut json), PldStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(pld_instance_from_json(json, &mut again), PldStatus::Ok);
        pld_string_free(json);
        let mut d = 0.0;
        assert_eq!(pld_population_distortion(again, c("copeland").as_ptr(), 1e-6, &mut d), PldStatus::Ok);
        assert_eq!(d, 1.0);
        assert_eq!(pld_population_distortion(again, c("rd").as_ptr(), 1e-6, &mut d), PldStatus::Ok);
        assert!(d > 1.0);
        pld_instance_free(again);
        pld_instance_free(inst);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(pld_instance_from_json(c("{\"m\": 1}").as_ptr(), &mut inst), PldStatus::Json);
        assert!(inst.is_null());
        assert!(!last_error().is_empty());
        let bad = [0.0, 1.5];
        assert_eq!(pld_instance_single(2.0, bad.as_ptr(), 2, &mut inst), PldStatus::InvalidInstance);
        assert!(last_error().contains("outside [0, 1]"));
        assert_eq!(pld_instance_single(2.0, ptr::null(), 2, &mut inst), PldStatus::NullPointer);
        let mut d = 0.0;
        assert_eq!(pld_population_distortion(ptr::null(), c("borda").as_ptr(), 1e-6, &mut d), PldStatus::NullPointer);
        let ok = [0.0, 1.0];
        pld_instance_single(2.0, ok.as_ptr(), 2, &mut inst);
        assert_eq!(pld_population_distortion(inst, c("nope").as_ptr(), 1e-6, &mut d), PldStatus::UnknownRule);
        assert_eq!(pld_population_distortion(inst, c("pv").as_ptr(), 1e-6, &mut d), PldStatus::UnsupportedRule);
        pld_instance_free(inst);
    }
}

#[test]
fn ties_are_reported_ambiguous() {
    let u = [0.5, 0.5];
    let mut inst = ptr::null_mut();
    let mut d = 0.0;
    unsafe {
        pld_instance_single(2.0, u.as_ptr(), 2, &mut inst);
        assert_eq!(pld_population_distortion(inst, c("plurality").as_ptr(), 1e-6, &mut d), PldStatus::Ambiguous);
        pld_instance_free(inst);
    }
}

#[test]
fn construct_sample_and_apply() {
    let mut inst = ptr::null_mut();
    let mut report = ptr::null_mut();
    let desc = c(r#"{"family": "copeland", "beta": 30, "epsilon": 0.1}"#);
    unsafe {
        assert_eq!(pld_construct(desc.as_ptr(), &mut inst, &mut report), PldStatus::Ok);
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        pld_string_free(report);
        assert!(text.contains("margin_BW_gt_half"));

        let mut tally = ptr::null_mut();
        assert_eq!(pld_sample_tally(inst, 20_000, 7, &mut tally), PldStatus::Ok);
        let (mut wy, mut yw) = (0u64, 0u64);
        pld_tally_wins(tally, 1, 2, &mut wy);
        pld_tally_wins(tally, 2, 1, &mut yw);
        assert_eq!(wy + yw, 20_000);
        assert_eq!(pld_tally_wins(tally, 3, 0, &mut wy), PldStatus::InvalidArgument);

        let mut lottery = [0.0; 3];
        for rule in ["copeland", "borda", "plurality", "pv", "ppv", "rd", "ml"] {
            assert_eq!(pld_apply_rule(tally, c(rule).as_ptr(), lottery.as_mut_ptr(), 3), PldStatus::Ok, "{rule}");
            assert!((lottery.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(pld_apply_rule(tally, c("rd").as_ptr(), lottery.as_mut_ptr(), 2), PldStatus::InvalidArgument);
        pld_tally_free(tally);

        let (mut mean, mut lo, mut hi) = (0.0, 0.0, 0.0);
        let st = pld_empirical_distortion(inst, c("borda").as_ptr(), 5000, 3, 1, &mut mean, &mut lo, &mut hi);
        assert_eq!(st, PldStatus::Ok);
        assert!(mean >= 1.0 && lo <= mean && mean <= hi);
        pld_instance_free(inst);
    }
    let bad = c(r#"{"family": "copeland", "beta": 30, "epsilon": 0.3}"#);
    assert_eq!(unsafe { pld_construct(bad.as_ptr(), ptr::null_mut(), ptr::null_mut()) }, PldStatus::Precondition);
    assert!(last_error().contains("(0, 1/4)"));
}

#[test]
fn bounds_and_version() {
    let (mut u, mut l, mut p) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(pld_bounds(c("copeland").as_ptr(), 5.0, 10, 0.1, &mut u, &mut l, &mut p), PldStatus::Ok);
        assert_eq!(u, 2.0 * p);
        assert_eq!(pld_bounds(c("pv").as_ptr(), 5.0, 10, 0.1, &mut u, &mut l, &mut p), PldStatus::Ok);
        assert!(u.is_nan());
    }
    let v = unsafe { CStr::from_ptr(pld_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn null_frees_are_harmless() {
    unsafe {
        pld_instance_free(ptr::null_mut());
        pld_tally_free(ptr::null_mut());
        pld_string_free(ptr::null_mut());
    }
}
