// SPDX-License-Identifier: Apache-2.0

use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use qdarwin::model::{propagator_for, ModelConfig};
use qdarwin_ffi::*;

fn small_params() -> QdParams {
    let mut p = unsafe {
        let mut p = std::mem::zeroed();
        assert_eq!(qd_params_default(&mut p), QdStatus::Ok);
        p
    };
    p.n_env = 40;
    p.gamma = 0.02;
    p
}

fn new_handle(params: &QdParams) -> *mut QdPropagator {
    let mut h = ptr::null_mut();
    let st = unsafe { qd_propagator_new(params, &mut h) };
    assert_eq!(st, QdStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    let p = qd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn defaults_match_core() {
    let p = small_params();
    let d = ModelConfig::default();
    assert_eq!(p.omega0, d.omega0);
    assert_eq!(p.alpha0_re, d.alpha0.re);
    assert!(p.gamma_bar < 0.0);
}

#[test]
fn amplitudes_agree_with_core() {
    let params = small_params();
    let h = new_handle(&params);
    let n = unsafe { qd_propagator_n_env(h) };
    assert_eq!(n, 40);

    let mut buf = vec![0.0; 2 * (n + 1)];
    let st = unsafe { qd_propagator_evolve(h, 25.0, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(st, QdStatus::Ok);

    let cfg = ModelConfig {
        n_env: 40,
        gamma: 0.02,
        time_grid: vec![0.0],
        ..ModelConfig::default()
    };
    let amps = propagator_for(&cfg).unwrap().evolve(cfg.alpha0, 25.0);
    for j in 0..=n {
        assert_eq!(buf[2 * j], amps.site(j).re);
        assert_eq!(buf[2 * j + 1], amps.site(j).im);
    }

    let (mut sys, mut env) = (0.0, 0.0);
    assert_eq!(unsafe { qd_excitations(h, 25.0, &mut sys, &mut env) }, QdStatus::Ok);
    assert!((sys + env - 9.0).abs() < 1e-9);

    let mut rate = 0.0;
    assert_eq!(unsafe { qd_propagator_decay_rate(h, &mut rate) }, QdStatus::Ok);
    assert!((rate - cfg.decay_rate()).abs() < 1e-15);
    unsafe { qd_propagator_free(h) };
}

#[test]
fn entropies_and_information() {
    let h = new_handle(&small_params());
    let (mut hs, mut mi_all, mut mi_one) = (0.0, 0.0, 0.0);
    let all: Vec<usize> = (1..=40).collect();
    unsafe {
        assert_eq!(qd_system_entropy(h, 60.0, &mut hs), QdStatus::Ok);
        assert_eq!(qd_mutual_information(h, 60.0, all.as_ptr(), all.len(), &mut mi_all), QdStatus::Ok);
        assert_eq!(qd_mutual_information(h, 60.0, [3usize].as_ptr(), 1, &mut mi_one), QdStatus::Ok);
    }
    // Pure global state: I(S:E) = 2 H(S).
    assert!(hs > 0.1);
    assert!((mi_all - 2.0 * hs).abs() < 1e-12);
    assert!(mi_one >= 0.0 && mi_one < mi_all);
    unsafe { qd_propagator_free(h) };
}

#[test]
fn nm_degree_through_the_boundary() {
    let mut params = small_params();
    let h0 = new_handle(&params);
    params.gamma_bar = 30.0 * params.gamma;
    let h1 = new_handle(&params);
    let times: Vec<f64> = (0..300).map(|i| i as f64 * 0.5).collect();
    let (mut n0, mut n1) = (-1.0, -1.0);
    unsafe {
        assert_eq!(qd_nm_degree(h0, times.as_ptr(), times.len(), 50, 7, &mut n0), QdStatus::Ok);
        assert_eq!(qd_nm_degree(h1, times.as_ptr(), times.len(), 50, 7, &mut n1), QdStatus::Ok);
        qd_propagator_free(h0);
        qd_propagator_free(h1);
    }
    assert!(n0 >= 0.0);
    assert!(n1 > n0);
}

#[test]
fn error_codes_and_messages() {
    let mut bad = small_params();
    bad.n_env = 0;
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { qd_propagator_new(&bad, &mut h) }, QdStatus::Config);
    assert!(h.is_null());
    assert!(last_error().contains("n_env"));

    assert_eq!(unsafe { qd_propagator_new(ptr::null(), &mut h) }, QdStatus::NullPointer);
    assert_eq!(last_error(), "params is null");

    let h = new_handle(&small_params());
    let mut buf = [0.0; 4];
    let st = unsafe { qd_propagator_evolve(h, 1.0, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(st, QdStatus::BufferTooSmall);
    assert!(last_error().contains("need 82"));

    let st = unsafe { qd_propagator_evolve(h, f64::NAN, buf.as_mut_ptr(), buf.len()) };
    assert_eq!(st, QdStatus::InvalidArgument);

    let mut out = 0.0;
    let dup = [2usize, 2];
    let st = unsafe { qd_mutual_information(h, 1.0, dup.as_ptr(), 2, &mut out) };
    assert_eq!(st, QdStatus::InvalidArgument);
    let st = unsafe { qd_mutual_information(h, 1.0, [41usize].as_ptr(), 1, &mut out) };
    assert_eq!(st, QdStatus::InvalidArgument);

    let st = unsafe { qd_nm_degree(h, [0.0].as_ptr(), 1, 10, 1, &mut out) };
    assert_eq!(st, QdStatus::InvalidArgument);

    assert_eq!(unsafe { qd_system_entropy(ptr::null(), 1.0, &mut out) }, QdStatus::NullPointer);
    assert_eq!(unsafe { qd_propagator_n_env(ptr::null()) }, 0);
    unsafe {
        qd_propagator_free(h);
        qd_propagator_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(qd_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/qdarwin.h")).unwrap();
    for name in [
        "qd_propagator_new",
        "qd_propagator_free",
        "qd_propagator_evolve",
        "qd_mutual_information",
        "qd_nm_degree",
        "qd_last_error",
        "QD_STATUS_BUFFER_TOO_SMALL",
        "typedef struct QdPropagator QdPropagator;",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipped syntax check");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"qdarwin.h\"\n\
         int probe(void) {\n\
           QdParams p; QdPropagator *h = 0; double buf[4];\n\
           if (qd_params_default(&p) != QD_STATUS_OK) return 1;\n\
           if (qd_propagator_new(&p, &h) != QD_STATUS_OK) return 2;\n\
           QdStatus st = qd_propagator_evolve(h, 1.0, buf, 4);\n\
           qd_propagator_free(h);\n\
           return st == QD_STATUS_BUFFER_TOO_SMALL ? 0 : 3;\n\
         }\n",
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .ok_or(())
}
