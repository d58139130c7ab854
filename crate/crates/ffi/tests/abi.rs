use std::ffi::{CStr, CString};
use std::ptr;

use tristoch_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ts_last_error()) }.to_string_lossy().into_owned()
}

fn t2() -> *mut TsTensor {
    let e = [1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0];
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ts_tensor_new(3, 2, e.as_ptr(), e.len(), &mut t) }, TsStatus::Ok);
    t
}

#[test]
fn tensor_lifecycle_and_queries() {
    let t = t2();
    unsafe {
        assert_eq!(ts_tensor_dim(t), 2);
        assert_eq!(ts_tensor_order(t), 3);
        let mut flag = -1;
        assert_eq!(ts_tensor_is_m_stochastic(t, 1e-9, &mut flag), TsStatus::Ok);
        assert_eq!(flag, 1);
        let mut id = -2;
        assert_eq!(ts_tensor_find_identity(t, &mut id), TsStatus::Ok);
        assert_eq!(id, 0);
        let mut sets = 0;
        assert_eq!(ts_tensor_reducing_set_count(t, &mut sets), TsStatus::Ok);
        assert_eq!(sets, 1);
        let (p, q) = ([0.3, 0.7], [0.9, 0.1]);
        let mut r = [0.0; 2];
        assert_eq!(ts_tensor_convolve(t, p.as_ptr(), q.as_ptr(), 2, r.as_mut_ptr()), TsStatus::Ok);
        assert!((r[0] - 0.34).abs() < 1e-15 && (r[1] - 0.66).abs() < 1e-15);
        ts_tensor_free(t);
        assert_eq!(ts_tensor_dim(ptr::null()), 0);
    }
}

#[test]
fn json_round_trip_through_c_strings() {
    let t = t2();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(ts_tensor_to_json(t, &mut s), TsStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(ts_tensor_from_json(s, &mut back), TsStatus::Ok);
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        ts_tensor_to_json(back, &mut a);
        assert_eq!(CStr::from_ptr(s), CStr::from_ptr(a));
        for x in [s, a] {
            ts_string_free(x);
        }
        let mut c = ptr::null_mut();
        assert_eq!(ts_channel_coherify(t, &mut c), TsStatus::Ok);
        ts_channel_to_json(c, &mut b);
        let mut c2 = ptr::null_mut();
        assert_eq!(ts_channel_from_json(b, &mut c2), TsStatus::Ok);
        assert_eq!(ts_channel_dim(c2), 2);
        ts_string_free(b);
        ts_channel_free(c);
        ts_channel_free(c2);
        ts_tensor_free(back);
        ts_tensor_free(t);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut t = ptr::null_mut();
        let short = [1.0; 7];
        assert_ne!(ts_tensor_new(3, 2, short.as_ptr(), 7, &mut t), TsStatus::Ok);
        assert!(t.is_null());
        assert!(!last_error().is_empty());
        let mut flag = 0;
        assert_eq!(ts_tensor_is_m_stochastic(ptr::null(), 1e-9, &mut flag), TsStatus::NullPointer);
        assert!(last_error().contains("tensor"));
        let bad = CString::new("{not json").unwrap();
        assert_eq!(ts_tensor_from_json(bad.as_ptr(), &mut t), TsStatus::Parse);
        assert_eq!(ts_tensor_cyclic(0, &mut t), TsStatus::InvalidArgument);
        let tt = t2();
        assert_eq!(ts_tensor_is_m_stochastic(tt, 1e-9, &mut flag), TsStatus::Ok);
        assert!(last_error().is_empty());
        let mut c = ptr::null_mut();
        ts_channel_coherify(tt, &mut c);
        let z = [0.0; 9];
        let mut o = [0.0; 9];
        let mut oi = [0.0; 9];
        let st = ts_channel_convolve(c, 3, z.as_ptr(), z.as_ptr(), z.as_ptr(), z.as_ptr(), o.as_mut_ptr(), oi.as_mut_ptr());
        assert_eq!(st, TsStatus::Dimension);
        ts_channel_free(c);
        ts_tensor_free(tt);
    }
}

#[test]
fn coherified_channel_properties_and_convolution() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(ts_tensor_cyclic(3, &mut t), TsStatus::Ok);
        let mut c = ptr::null_mut();
        assert_eq!(ts_channel_coherify(t, &mut c), TsStatus::Ok);
        let mut flag = 0;
        ts_channel_is_channel(c, &mut flag);
        assert_eq!(flag, 1);
        let mut c2 = 0.0;
        ts_channel_c2(c, &mut c2);
        assert!((c2 - 2.0 / 9.0).abs() < 1e-12);
        let mut ent = 0.0;
        assert_eq!(ts_channel_entropic(c, &mut ent), TsStatus::Ok);
        assert!(ent >= -1e-12);
        let rho = [0.2, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.3];
        let sigma = [0.6, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0, 0.3];
        let zero = [0.0; 9];
        let (mut re, mut im) = ([0.0; 9], [0.0; 9]);
        let st = ts_channel_convolve(c, 3, rho.as_ptr(), zero.as_ptr(), sigma.as_ptr(), zero.as_ptr(), re.as_mut_ptr(), im.as_mut_ptr());
        assert_eq!(st, TsStatus::Ok, "{}", last_error());
        let p = [0.2, 0.5, 0.3];
        let q = [0.6, 0.1, 0.3];
        for i in 0..3 {
            let want: f64 = (0..3).map(|j| p[j] * q[(i + 3 - j) % 3]).sum();
            assert!((re[i * 4] - want).abs() < 1e-12);
        }
        let mut d = ptr::null_mut();
        ts_channel_diagonal(t, &mut d);
        ts_channel_is_m_stochastic(d, &mut flag);
        assert_eq!(flag, 1);
        ts_channel_free(d);
        ts_channel_free(c);
        ts_tensor_free(t);
    }
}

#[test]
fn qubit_gate_and_metrics() {
    unsafe {
        let (mut re, mut im) = ([0.0; 16], [0.0; 16]);
        assert_eq!(ts_qubit_gate(0.3, 1.1, -0.4, re.as_mut_ptr(), im.as_mut_ptr()), TsStatus::Ok);
        for c in 0..4 {
            let norm: f64 = (0..4).map(|r| re[r * 4 + c].powi(2) + im[r * 4 + c].powi(2)).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        let (mut ep, mut gt) = (0.0, 0.0);
        assert_eq!(ts_qubit_metrics(0.0, 0.7, 0.0, &mut ep, &mut gt), TsStatus::Ok);
        assert!((ep - 2.0 / 3.0).abs() < 1e-10);
        assert!((gt - (3.0 + 0.7f64.cos()) / 6.0).abs() < 1e-10);
        assert_eq!(ts_qubit_metrics(f64::NAN, 0.0, 0.0, &mut ep, &mut gt), TsStatus::InvalidArgument);
        let mut s = ptr::null_mut();
        assert_eq!(ts_qubit_qasm(0.0, 0.5, 0.0, &mut s), TsStatus::Ok);
        assert!(CStr::from_ptr(s).to_str().unwrap().starts_with("OPENQASM"));
        ts_string_free(s);
    }
}
