use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use flho_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(flho_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn spectrum_handle_round_trip() {
    let mut spec: *mut FlhoSpectrum = ptr::null_mut();
    let st = unsafe { flho_spectrum_new(2, 1.0, 1.0, 0, &mut spec) };
    assert_eq!(st, FlhoStatus::Ok);
    assert!(!spec.is_null());
    assert_eq!(last_error(), "");
    unsafe {
        assert_eq!(flho_spectrum_len(spec), 5);
        let mut buf = [0.0; 5];
        let mut n = 0usize;
        assert_eq!(flho_spectrum_eigenvalues(spec, buf.as_mut_ptr(), 5, &mut n), FlhoStatus::Ok);
        assert_eq!(n, 5);
        assert_eq!(buf, [1.0, 1.0, 2.5, 2.5, 3.0]);

        let (mut e, mut p, mut g) = (0.0, 9u32, 9usize);
        assert_eq!(flho_spectrum_get(spec, 4, &mut e, &mut p, &mut g), FlhoStatus::Ok);
        assert_eq!((e, p, g), (3.0, 0, 2));
        assert_eq!(flho_spectrum_get(spec, 5, &mut e, ptr::null_mut(), ptr::null_mut()), FlhoStatus::InvalidArgument);
        assert!(last_error().contains("index 5"));

        assert_eq!(flho_spectrum_group_count(spec), 3);
        let (mut v, mut m) = (0.0, 0usize);
        assert_eq!(flho_spectrum_group(spec, 1, &mut v, &mut m), FlhoStatus::Ok);
        assert_eq!((v, m), (2.5, 2));
        flho_spectrum_free(spec);
        flho_spectrum_free(ptr::null_mut());
    }
}

#[test]
fn partial_spectrum_and_short_buffer() {
    let mut spec = ptr::null_mut();
    unsafe {
        assert_eq!(flho_spectrum_new(1000, 1.0, 1.3, 4, &mut spec), FlhoStatus::Ok);
        assert_eq!(flho_spectrum_len(spec), 4);
        let mut buf = [0.0; 2];
        let mut n = 0;
        assert_eq!(flho_spectrum_eigenvalues(spec, buf.as_mut_ptr(), 2, &mut n), FlhoStatus::Ok);
        assert_eq!(n, 2);
        assert!(buf[0] <= buf[1]);
        flho_spectrum_free(spec);
    }
}

#[test]
fn error_codes() {
    let mut spec = ptr::null_mut();
    unsafe {
        assert_eq!(flho_spectrum_new(0, 1.0, 1.0, 0, &mut spec), FlhoStatus::InvalidArgument);
        assert!(spec.is_null());
        assert!(last_error().contains("l must be"));
        assert_eq!(flho_spectrum_new(3, -1.0, 1.0, 0, &mut spec), FlhoStatus::InvalidArgument);
        assert_eq!(flho_spectrum_new(3, 1.0, 1.0, 0, ptr::null_mut()), FlhoStatus::NullPointer);
        assert_eq!(flho_spectrum_len(ptr::null()), 0);
        let mut n = 0;
        assert_eq!(flho_spectrum_eigenvalues(ptr::null(), ptr::null_mut(), 0, &mut n), FlhoStatus::NullPointer);
        let mut out = 0.0;
        assert_eq!(flho_medium_level(2, 1.0, 5, &mut out), FlhoStatus::InvalidArgument);
        let path = CString::new("/nonexistent/x.json").unwrap();
        let mut rep = FlhoKillingReport::default();
        assert_eq!(flho_killing_report_file(path.as_ptr(), &mut rep), FlhoStatus::Io);
    }
}

#[test]
fn constants_and_levels() {
    let mut c = FlhoConstants::default();
    let st = unsafe { flho_constants(1.0, 0.01, 0.04, 2.0, 2.0, &mut c) };
    assert_eq!(st, FlhoStatus::Ok);
    assert_eq!(c.l, 50);
    assert!((c.kappa - 1.0).abs() < 1e-12);
    assert!((c.j * c.l as f64 - 1.0).abs() < 1e-15);

    let mut e = 0.0;
    unsafe {
        assert_eq!(flho_medium_level(2, 1.0, 1, &mut e), FlhoStatus::Ok);
    }
    assert_eq!(e, 2.5);
}

#[test]
fn killing_reports() {
    let mut rep = FlhoKillingReport::default();
    let so3 = [0.0, 1.0, 2.0, 1.0, 1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 1.0, 1.0];
    unsafe {
        assert_eq!(flho_killing_report(3, so3.as_ptr(), 3, &mut rep), FlhoStatus::Ok);
    }
    assert_eq!(rep.semisimple, 1);
    assert_eq!(rep.killing_rank, 3);
    assert!((rep.killing_det + 8.0).abs() < 1e-12);

    let bad_index = [0.0, 1.0, 3.0, 1.0];
    let broken = [0.0, 1.0, 2.0, 1.0, 1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.5];
    unsafe {
        assert_eq!(flho_killing_report(3, bad_index.as_ptr(), 1, &mut rep), FlhoStatus::InvalidArgument);
        assert_eq!(flho_killing_report(3, broken.as_ptr(), 4, &mut rep), FlhoStatus::InvalidArgument);
        assert!(last_error().contains("Jacobi"), "{}", last_error());
        assert_eq!(flho_killing_report(3, ptr::null(), 1, &mut rep), FlhoStatus::NullPointer);
    }
}

#[test]
fn errors_are_per_thread() {
    let mut spec = ptr::null_mut();
    unsafe {
        assert_eq!(flho_spectrum_new(0, 1.0, 1.0, 0, &mut spec), FlhoStatus::InvalidArgument);
    }
    let other = std::thread::spawn(last_error).join().unwrap();
    assert_eq!(other, "");
    assert!(!last_error().is_empty());
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/flho.h")).unwrap();
    for name in [
        "flho_last_error",
        "flho_version",
        "flho_spectrum_new",
        "flho_spectrum_free",
        "flho_spectrum_len",
        "flho_spectrum_eigenvalues",
        "flho_spectrum_get",
        "flho_spectrum_group_count",
        "flho_spectrum_group",
        "flho_constants",
        "flho_medium_level",
        "flho_killing_report",
        "flho_killing_report_file",
        "typedef struct FlhoSpectrum FlhoSpectrum;",
        "FLHO_STATUS_PANIC = 5",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libflho_ffi.a");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("flho_smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok 0.1.0"));
}
