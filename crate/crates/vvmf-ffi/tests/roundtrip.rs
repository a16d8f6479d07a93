use std::ffi::{CStr, CString};
use std::ptr;

use vvmf_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    let v = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { vvmf_string_free(s) };
    v
}

#[test]
fn solve_and_read_coefficients() {
    let e = CString::new("1/40,31/40,-1/40,9/40").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { vvmf_solve(4, e.as_ptr(), 10, &mut h) }, VvmfStatus::Ok);
    let mut rank = 0;
    assert_eq!(unsafe { vvmf_expansion_rank(h, &mut rank) }, VvmfStatus::Ok);
    assert_eq!(rank, 4);
    let row: Vec<String> = (0..10)
        .map(|i| {
            let mut s = ptr::null_mut();
            assert_eq!(unsafe { vvmf_expansion_coeff(h, 0, i, &mut s) }, VvmfStatus::Ok);
            take(s)
        })
        .collect();
    assert_eq!(row, ["1", "0", "1", "1", "2", "2", "4", "4", "6", "7"]);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { vvmf_expansion_exponent(h, 1, &mut s) }, VvmfStatus::Ok);
    assert_eq!(take(s), "31/40");
    assert_eq!(unsafe { vvmf_expansion_coeff(h, 4, 0, &mut s) }, VvmfStatus::OutOfRange);
    unsafe { vvmf_expansion_free(h) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut h = ptr::null_mut();
    let bad = CString::new("1/40,x").unwrap();
    assert_eq!(unsafe { vvmf_solve(4, bad.as_ptr(), 5, &mut h) }, VvmfStatus::Parse);
    let wrong_trace = CString::new("1/40,2/40,3/40,4/40").unwrap();
    assert_eq!(unsafe { vvmf_solve(4, wrong_trace.as_ptr(), 5, &mut h) }, VvmfStatus::Domain);
    let msg = unsafe { CStr::from_ptr(vvmf_last_error()) }.to_str().unwrap();
    assert!(msg.contains("trace"), "{msg}");
    assert_eq!(unsafe { vvmf_solve(4, ptr::null(), 5, &mut h) }, VvmfStatus::NullPointer);
    assert!(h.is_null());
    unsafe { vvmf_expansion_free(ptr::null_mut()) };
    unsafe { vvmf_string_free(ptr::null_mut()) };
}

#[test]
fn dim_m0_and_conformal_check() {
    let (c, hh) = (CString::new("33").unwrap(), CString::new("9/4").unwrap());
    let (mut v, mut integral) = (0.0, 0);
    assert_eq!(unsafe { vvmf_dim_m0(c.as_ptr(), hh.as_ptr(), &mut v, &mut integral) }, VvmfStatus::Ok);
    assert_eq!(integral, 1);
    assert!((v - 565760.0).abs() < 1e-6);

    let name = CString::new("table3-row-1").unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { vvmf_builtin(name.as_ptr(), 6, &mut h) }, VvmfStatus::Ok);
    let mut js = ptr::null_mut();
    assert_eq!(unsafe { vvmf_expansion_json(h, &mut js) }, VvmfStatus::Ok);
    assert!(take(js).contains("14280"));
    let s = vvmf::conformal::s_table3_s1(256).to_json().to_string();
    let s = CString::new(s).unwrap();
    let mut conformal = -1;
    assert_eq!(unsafe { vvmf_check_conformal(h, s.as_ptr(), 0, &mut conformal) }, VvmfStatus::Ok);
    assert_eq!(conformal, 1);
    unsafe { vvmf_expansion_free(h) };
}
