//! Tests of the C ABI: status codes, handle lifecycle, error messages, and a
//! C program compiled against the generated header.

use annulus_sle_ffi::*;
use std::ffi::CStr;
use std::path::PathBuf;
use std::ptr;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 512];
    unsafe {
        asle_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn special_values_and_status_codes() {
    let (mut re, mut im) = (f64::NAN, f64::NAN);
    unsafe {
        assert_eq!(
            asle_loewner_kernel(1.3, 0.0, 1.3, &mut re, &mut im),
            AsleStatus::Ok
        );
        assert!(re.abs() < 1e-11 && (im + 1.0).abs() < 1e-11);
        assert_eq!(last_error(), "");

        assert_eq!(
            asle_theta(0.01, 0.5, 0.0, &mut re, &mut im),
            AsleStatus::InvalidArgument
        );
        assert!(!last_error().is_empty());
        assert_eq!(
            asle_loewner_kernel(1.0, 0.0, 0.0, &mut re, &mut im),
            AsleStatus::Numerical
        );
        assert_eq!(
            asle_theta(1.0, 0.5, 0.0, ptr::null_mut(), &mut im),
            AsleStatus::NullPointer
        );

        let mut g = 0.0;
        assert_eq!(
            asle_green(AsleBoundary::Dirichlet, 1.0, 1.0, 0.5, 2.0, 0.3, &mut g),
            AsleStatus::Ok
        );
        assert!(g > 0.0);
    }
}

#[test]
fn partition_handle_lifecycle() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(
            asle_partition_new(AsleMethod::Euler, 6.0, AsleBoundary::Er, &mut h),
            AsleStatus::Ok
        );
        let mut z = 0.0;
        assert_eq!(asle_partition_eval(h, 1.0, 2.0, &mut z), AsleStatus::Ok);
        assert!(z > 0.0);
        assert_eq!(
            asle_partition_eval(h, 1.0, 7.0, &mut z),
            AsleStatus::InvalidArgument
        );
        asle_partition_free(h);
        asle_partition_free(ptr::null_mut());

        let mut bad = ptr::null_mut();
        assert_eq!(
            asle_partition_new(AsleMethod::Euler, 2.0, AsleBoundary::Er, &mut bad),
            AsleStatus::InvalidArgument
        );
        assert!(bad.is_null());
        assert_eq!(
            asle_partition_eval(ptr::null(), 1.0, 2.0, &mut z),
            AsleStatus::NullPointer
        );
    }
}

#[test]
fn force_drift_and_path() {
    let a = (2.0f64 / 4.0).sqrt();
    unsafe {
        let q = [std::f64::consts::PI];
        let beta = [-a];
        let mut f = ptr::null_mut();
        assert_eq!(
            asle_force_new(
                4.0,
                AsleBoundary::Dirichlet,
                2.0,
                1,
                q.as_ptr(),
                beta.as_ptr(),
                ptr::null(),
                &mut f
            ),
            AsleStatus::Ok
        );
        let mut lambda = f64::NAN;
        assert_eq!(asle_force_drift(f, 2.0, 0.0, &mut lambda), AsleStatus::Ok);
        // Λ = √(κ/2)·β·H̃(−π) with H(−π) = 0 and H̃(z) = H(z) + z/r.
        assert!(
            (lambda - std::f64::consts::FRAC_PI_2).abs() < 1e-10,
            "{lambda}"
        );
        let mut z = 0.0;
        assert_eq!(asle_force_partition(f, 2.0, 0.0, &mut z), AsleStatus::Ok);
        assert!(z > 0.0);

        let run = |seed: u64| {
            let mut p = ptr::null_mut();
            assert_eq!(
                asle_loewner_new(4.0, 2.0, 0.0, 1e-3, seed, f, &mut p),
                AsleStatus::Ok
            );
            assert_eq!(asle_loewner_advance(p, 200), AsleStatus::Ok);
            let (mut t, mut xi) = (0.0, 0.0);
            assert_eq!(asle_loewner_driver(p, &mut t, &mut xi), AsleStatus::Ok);
            let (mut gr, mut gi) = (0.0, 0.0);
            assert_eq!(asle_loewner_tip(p, 1e-3, &mut gr, &mut gi), AsleStatus::Ok);
            asle_loewner_free(p);
            (t, xi, gr, gi)
        };
        let (a1, a2) = (run(3), run(3));
        assert_eq!(a1, a2);
        assert!((a1.0 - 0.2).abs() < 1e-12);
        assert!(a1.3 > 0.0 && a1.3 < 2.0);

        let mut p = ptr::null_mut();
        assert_eq!(
            asle_loewner_new(3.0, 2.0, 0.0, 1e-3, 1, f, &mut p),
            AsleStatus::InvalidArgument
        );
        asle_force_free(f);

        // Broken neutrality.
        let beta = [0.1];
        let mut g = ptr::null_mut();
        assert_eq!(
            asle_force_new(
                4.0,
                AsleBoundary::Er,
                2.0,
                1,
                q.as_ptr(),
                beta.as_ptr(),
                ptr::null(),
                &mut g
            ),
            AsleStatus::InvalidArgument
        );
        assert!(last_error().contains("neutrality"));
    }
}

#[test]
fn error_message_truncates() {
    unsafe {
        let (mut re, mut im) = (0.0, 0.0);
        asle_theta(0.01, 0.0, 0.0, &mut re, &mut im);
        let mut buf = [1 as std::ffi::c_char; 8];
        let n = asle_last_error_message(buf.as_mut_ptr(), buf.len());
        assert!(n > 7);
        assert_eq!(buf[7], 0);
        assert_eq!(asle_last_error_message(ptr::null_mut(), 0), n);
    }
}

#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // Test binaries live in target/<profile>/deps; the static library one level up.
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    let lib = lib_dir.join("libannulus_sle_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out = tempfile::tempdir().unwrap();
    let bin = out.path().join("smoke");
    let status = std::process::Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler named cc is on PATH");
    assert!(status.success());
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status);
    let text = String::from_utf8(run.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert!(lines[0].parse::<f64>().unwrap().abs() < 1e-12);
    assert!(lines[1].parse::<f64>().unwrap() > 0.0);
    assert!((lines[2].parse::<f64>().unwrap() - 0.1).abs() < 1e-12);
    assert!(!lines[3].is_empty());
}
