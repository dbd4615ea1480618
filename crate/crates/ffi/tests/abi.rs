use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use qauth::*;

fn example_json() -> CString {
    CString::new(include_str!("../../core/fixtures/worked_example.json").trim()).unwrap()
}

#[test]
fn json_round_trip_through_handle() {
    let json = example_json();
    let mut u = ptr::null_mut();
    assert_eq!(
        unsafe { qauth_unitary_from_json(json.as_ptr(), 0.0, &mut u) },
        QauthStatus::Ok
    );
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { qauth_unitary_to_json(u, &mut out) }, QauthStatus::Ok);
    let back = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    assert_eq!(back, json.to_str().unwrap());
    unsafe {
        qauth_string_free(out);
        qauth_unitary_free(u);
    }
}

#[test]
fn probabilities_for_fixtures() {
    let pe = qauth_unitary_worked_example();
    let mut p = 0.0;
    assert_eq!(unsafe { qauth_no_message_optimal(pe, &mut p) }, QauthStatus::Ok);
    assert!((p - (2.0 + 2f64.sqrt()) / 4.0).abs() < 1e-12, "{p}");
    let mut m = 0.0;
    assert_eq!(
        unsafe { qauth_best_message_attack(pe, 2_000, 3, &mut m) },
        QauthStatus::Ok
    );
    assert!(m > 0.5 && m < 1.0);
    assert_eq!(
        unsafe { qauth_best_message_attack(pe, 0, 3, &mut m) },
        QauthStatus::InvalidArgument
    );
    unsafe { qauth_unitary_free(pe) };
}

#[test]
fn identity_from_parts_is_insecure() {
    let mut re = [0.0; 16];
    for i in 0..4 {
        re[5 * i] = 1.0;
    }
    let im = [0.0; 16];
    let mut u = ptr::null_mut();
    assert_eq!(
        unsafe { qauth_unitary_from_parts(re.as_ptr(), im.as_ptr(), 16, 0.0, &mut u) },
        QauthStatus::Ok
    );
    let mut secure = -1;
    assert_eq!(
        unsafe { qauth_validate(u, 0, 0, &mut secure, ptr::null_mut()) },
        QauthStatus::Ok
    );
    assert_eq!(secure, 0);
    unsafe { qauth_unitary_free(u) };
}

#[test]
fn error_codes_and_messages() {
    let mut u = ptr::null_mut();
    let mut re = [0.0; 16];
    re[0] = 2.0;
    let im = [0.0; 16];
    assert_eq!(
        unsafe { qauth_unitary_from_parts(re.as_ptr(), im.as_ptr(), 16, 0.0, &mut u) },
        QauthStatus::NotUnitary
    );
    assert!(u.is_null());
    let msg = unsafe { CStr::from_ptr(qauth_last_error_message()) }.to_str().unwrap();
    assert!(msg.contains("not unitary"), "{msg}");

    assert_eq!(
        unsafe { qauth_unitary_from_parts(re.as_ptr(), im.as_ptr(), 9, 0.0, &mut u) },
        QauthStatus::DimensionMismatch
    );
    let garbage = CString::new("{\"rows\": 4,").unwrap();
    assert_eq!(
        unsafe { qauth_unitary_from_json(garbage.as_ptr(), 0.0, &mut u) },
        QauthStatus::Parse
    );
    assert_eq!(
        unsafe { qauth_unitary_from_json(ptr::null(), 0.0, &mut u) },
        QauthStatus::NullPointer
    );
    let mut p = 0.0;
    assert_eq!(
        unsafe { qauth_no_message_optimal(ptr::null(), &mut p) },
        QauthStatus::NullPointer
    );
    unsafe {
        qauth_unitary_free(ptr::null_mut());
        qauth_string_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(qauth_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/qauth.h");
    for name in [
        "qauth_version",
        "qauth_last_error_message",
        "qauth_unitary_from_json",
        "qauth_unitary_from_parts",
        "qauth_unitary_worked_example",
        "qauth_unitary_free",
        "qauth_unitary_to_json",
        "qauth_no_message_optimal",
        "qauth_best_message_attack",
        "qauth_validate",
        "qauth_string_free",
        "QAUTH_STATUS_NOT_UNITARY",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Compiles the C smoke program against the generated header and the static
/// library, then runs it. Skipped when no C compiler or static archive is
/// available.
#[test]
fn c_program_links_and_runs() {
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    let archive = profile_dir.join("libqauth.a");
    if !archive.exists() {
        eprintln!("{} not built; skipping", archive.display());
        return;
    }
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new(cc)
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 failures"));
}
