use std::ffi::{c_char, CStr};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use mortar_rbf_ffi::*;

fn last_error() -> String {
    let n = unsafe { mr_last_error_message(ptr::null_mut(), 0) };
    let mut buf = vec![0 as c_char; n];
    unsafe { mr_last_error_message(buf.as_mut_ptr(), n) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn interval(a: f64, b: f64, n: usize, kind: MrElementKind) -> *mut MrMesh {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { mr_mesh_interval(a, b, n, kind as i32, &mut m) }, MrStatus::Ok);
    m
}

fn config(scheme: MrScheme, kernel: MrKernel, n_gauss: usize) -> MrConfig {
    let mut c = MrConfig {
        scheme: 0,
        n_gauss: 0,
        kernel: 0,
        n_m: 0,
        max_condition: 0.0,
    };
    assert_eq!(unsafe { mr_config_default(&mut c) }, MrStatus::Ok);
    c.scheme = scheme as i32;
    c.kernel = kernel as i32;
    c.n_gauss = n_gauss;
    c
}

#[test]
fn assemble_and_transfer_constants() {
    for (scheme, kernel) in [
        (MrScheme::Rb, MrKernel::Gaussian),
        (MrScheme::Rb, MrKernel::WendlandC2),
        (MrScheme::Eb, MrKernel::Gaussian),
        (MrScheme::Sb1d, MrKernel::Gaussian),
    ] {
        let (m, s) = (
            interval(0.0, 2.0, 5, MrElementKind::Seg3),
            interval(0.0, 2.0, 3, MrElementKind::Seg3),
        );
        let mut op = ptr::null_mut();
        let cfg = config(scheme, kernel, 3);
        assert_eq!(unsafe { mr_assemble(m, s, &cfg, &mut op) }, MrStatus::Ok, "{}", last_error());
        unsafe {
            mr_mesh_free(m);
            mr_mesh_free(s);
        }
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(unsafe { mr_operator_dims(op, &mut rows, &mut cols) }, MrStatus::Ok);
        assert_eq!((rows, cols), (7, 11));
        let mut defect = f64::NAN;
        assert_eq!(unsafe { mr_operator_row_sum_defect(op, &mut defect) }, MrStatus::Ok);
        assert!(defect <= 1e-10, "{scheme:?}: {defect}");
        let um = vec![1.0; cols];
        let mut us = vec![0.0; rows];
        assert_eq!(
            unsafe { mr_operator_transfer(op, um.as_ptr(), cols, us.as_mut_ptr(), rows) },
            MrStatus::Ok
        );
        assert!(us.iter().all(|v| (v - 1.0).abs() <= 1e-10));
        let mut e = vec![0.0; rows * cols];
        assert_eq!(unsafe { mr_operator_dense(op, e.as_mut_ptr(), e.len()) }, MrStatus::Ok);
        for i in 0..rows {
            assert!((e[i * cols..(i + 1) * cols].iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
        let mut dropped = f64::NAN;
        assert_eq!(unsafe { mr_operator_dropped_fraction(op, &mut dropped) }, MrStatus::Ok);
        assert!((0.0..=1.0).contains(&dropped));
        unsafe { mr_operator_free(op) };
    }
}

#[test]
fn explicit_mesh_matches_generator() {
    let nodes = [0.0, 0.0, 0.5, 0.0, 1.0, 0.0];
    let conn = [0usize, 1, 1, 2];
    let mut m = ptr::null_mut();
    let status = unsafe { mr_mesh_new(2, nodes.as_ptr(), 3, MrElementKind::Seg2 as i32, conn.as_ptr(), conn.len(), &mut m) };
    assert_eq!(status, MrStatus::Ok, "{}", last_error());
    let mut n = 0;
    assert_eq!(unsafe { mr_mesh_node_count(m, &mut n) }, MrStatus::Ok);
    assert_eq!(n, 3);
    let s = interval(0.0, 1.0, 2, MrElementKind::Seg2);
    let mut op = ptr::null_mut();
    let cfg = config(MrScheme::Sb1d, MrKernel::Gaussian, 2);
    assert_eq!(unsafe { mr_assemble(m, s, &cfg, &mut op) }, MrStatus::Ok);
    let mut e = vec![0.0; 9];
    assert_eq!(unsafe { mr_operator_dense(op, e.as_mut_ptr(), 9) }, MrStatus::Ok);
    for i in 0..3 {
        for k in 0..3 {
            assert!((e[i * 3 + k] - if i == k { 1.0 } else { 0.0 }).abs() <= 1e-14);
        }
    }
    unsafe {
        mr_operator_free(op);
        mr_mesh_free(m);
        mr_mesh_free(s);
    }
}

#[test]
fn warped_surface_pair() {
    let (mut m, mut s) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(mr_mesh_square(3, MrElementKind::Quad4 as i32, 0.2, &mut m), MrStatus::Ok);
        assert_eq!(mr_mesh_square(2, MrElementKind::Quad4 as i32, 0.2, &mut s), MrStatus::Ok);
    }
    let mut cfg = config(MrScheme::Rb, MrKernel::Gaussian, 16);
    cfg.max_condition = 0.0;
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { mr_assemble(m, s, &cfg, &mut op) }, MrStatus::Ok, "{}", last_error());
    let mut defect = f64::NAN;
    unsafe { mr_operator_row_sum_defect(op, &mut defect) };
    assert!(defect <= 1e-10);
    unsafe {
        mr_operator_free(op);
        mr_mesh_free(m);
        mr_mesh_free(s);
    }
}

#[test]
fn errors_are_reported() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { mr_mesh_interval(0.0, 1.0, 2, 9, &mut m) }, MrStatus::InvalidArgument);
    assert!(last_error().contains("element kind"));
    assert_eq!(unsafe { mr_mesh_interval(1.0, 0.0, 2, 0, &mut m) }, MrStatus::InvalidArgument);
    assert!(m.is_null());
    assert_eq!(unsafe { mr_mesh_interval(0.0, 1.0, 2, 0, ptr::null_mut()) }, MrStatus::NullPointer);
    assert!(last_error().contains("out"));
    assert_eq!(unsafe { mr_config_default(ptr::null_mut()) }, MrStatus::NullPointer);

    let (a, b) = (
        interval(0.0, 1.0, 2, MrElementKind::Seg2),
        interval(0.0, 1.0, 3, MrElementKind::Seg2),
    );
    let mut op = ptr::null_mut();
    let mut cfg = config(MrScheme::Eb, MrKernel::Gaussian, 1);
    assert_eq!(unsafe { mr_assemble(a, b, &cfg, &mut op) }, MrStatus::InvalidArgument);
    assert!(last_error().contains("n_gauss"));
    cfg.n_gauss = 2;
    assert_eq!(unsafe { mr_assemble(a, b, &cfg, &mut op) }, MrStatus::Ok);
    assert!(last_error().is_empty());
    let um = [1.0; 2];
    let mut us = [0.0; 4];
    assert_eq!(
        unsafe { mr_operator_transfer(op, um.as_ptr(), 2, us.as_mut_ptr(), 4) },
        MrStatus::DimensionMismatch
    );
    let mut short = [0.0; 3];
    assert_eq!(unsafe { mr_operator_dense(op, short.as_mut_ptr(), 3) }, MrStatus::DimensionMismatch);
    unsafe {
        mr_operator_free(op);
        mr_operator_free(ptr::null_mut());
        mr_mesh_free(a);
        mr_mesh_free(b);
        mr_mesh_free(ptr::null_mut());
    }
}

#[test]
fn truncated_error_message() {
    unsafe { mr_mesh_interval(0.0, 1.0, 2, 0, ptr::null_mut()) };
    let full = last_error();
    let mut buf = [1 as c_char; 4];
    let n = unsafe { mr_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(n, full.len() + 1);
    assert_eq!(buf[3], 0);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes(), &full.as_bytes()[..3]);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(mr_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/mortar_rbf.h")).unwrap();
    for name in [
        "mr_version",
        "mr_last_error_message",
        "mr_config_default",
        "mr_mesh_new",
        "mr_mesh_interval",
        "mr_mesh_square",
        "mr_mesh_node_count",
        "mr_mesh_free",
        "mr_assemble",
        "mr_operator_dims",
        "mr_operator_row_sum_defect",
        "mr_operator_dropped_fraction",
        "mr_operator_transfer",
        "mr_operator_dense",
        "mr_operator_free",
        "MR_STATUS_OK",
        "MR_ELEMENT_KIND_QUAD8",
        "MR_SCHEME_SB1D",
        "MR_KERNEL_WENDLAND_C2",
        "typedef struct MrMesh MrMesh",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libmortar_rbf_ffi.a");
    lib.exists().then_some(lib)
}

fn have(tool: &str) -> bool {
    Command::new(tool).arg("--version").output().is_ok()
}

#[test]
fn c_program_links_against_static_library() {
    if !have("cc") {
        eprintln!("skipping: no C compiler on PATH");
        return;
    }
    let lib = static_lib().expect("static library next to the test binary");
    let dir = tempfile_dir();
    let exe = dir.join("smoke");
    let src = manifest_dir().join("tests/c/smoke.c");
    let include = manifest_dir().join("include");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

fn tempfile_dir() -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("ffi-smoke");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
