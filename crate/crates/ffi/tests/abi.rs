use std::ffi::{CStr, CString};
use std::ptr;

use chern_lab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(cl_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn winding_integral_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("w.mvf").to_str().unwrap()).unwrap();
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(cl_field_winding(4096, -2, &mut f), ClStatus::Ok);
        assert_eq!(cl_field_write(f, path.as_ptr()), ClStatus::Ok);
        cl_field_free(f);

        let mut g = ptr::null_mut();
        assert_eq!(cl_field_read(path.as_ptr(), &mut g), ClStatus::Ok);
        let mut kind = ClFieldKind::Form;
        assert_eq!(cl_field_kind(g, &mut kind), ClStatus::Ok);
        assert_eq!(kind, ClFieldKind::Unitary);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(cl_field_chern_integral(g, &mut re, &mut im), ClStatus::Ok);
        assert!((re + 2.0).abs() < 1e-5 && im.abs() < 1e-12, "{re} {im}");
        cl_field_free(g);
    }
}

#[test]
fn bloch_integral_is_the_degree() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(cl_field_bloch(128, 1, &mut f), ClStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(cl_field_chern_integral(f, &mut re, &mut im), ClStatus::Ok);
        assert!((re - 1.0).abs() < 1e-2, "{re}");
        cl_field_free(f);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(cl_field_winding(64, 1, ptr::null_mut()), ClStatus::NullPointer);
        assert_eq!(cl_field_winding(1, 1, &mut f), ClStatus::Mismatch);
        assert!(f.is_null());
        assert!(!last_error().is_empty());

        let missing = CString::new("/nonexistent/dir/f.mvf").unwrap();
        assert_eq!(cl_field_read(missing.as_ptr(), &mut f), ClStatus::Io);

        let dir = tempfile::tempdir().unwrap();
        let junk = dir.path().join("junk.mvf");
        std::fs::write(&junk, b"not a field").unwrap();
        let junk = CString::new(junk.to_str().unwrap()).unwrap();
        assert_eq!(cl_field_read(junk.as_ptr(), &mut f), ClStatus::Format);

        let mut r = ptr::null_mut();
        let bad = CString::new("no-such-suite").unwrap();
        assert_eq!(cl_suite_run(bad.as_ptr(), 32, 0, &mut r), ClStatus::InvalidArgument);
        assert!(last_error().contains("no-such-suite"));

        // Free functions accept null.
        cl_field_free(ptr::null_mut());
        cl_report_free(ptr::null_mut());
        cl_string_free(ptr::null_mut());
    }
}

#[test]
fn suite_report_as_json() {
    unsafe {
        let mut r = ptr::null_mut();
        let name = CString::new("sums").unwrap();
        assert_eq!(cl_suite_run(name.as_ptr(), 16, 0, &mut r), ClStatus::Ok);
        let mut pass = false;
        assert_eq!(cl_report_pass(r, &mut pass), ClStatus::Ok);
        assert!(pass);
        let mut s = ptr::null_mut();
        assert_eq!(cl_report_json(r, &mut s), ClStatus::Ok);
        let json: serde_json::Value = serde_json::from_str(CStr::from_ptr(s).to_str().unwrap()).unwrap();
        assert_eq!(json["suite"], "sums");
        assert_eq!(json["pass"], true);
        cl_string_free(s);
        cl_report_free(r);
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/chern_lab.h")).unwrap();
    for f in [
        "cl_last_error",
        "cl_field_winding",
        "cl_field_bloch",
        "cl_field_read",
        "cl_field_write",
        "cl_field_kind",
        "cl_field_chern_integral",
        "cl_field_free",
        "cl_suite_run",
        "cl_report_pass",
        "cl_report_json",
        "cl_report_free",
        "cl_string_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from the header");
    }
    assert!(header.contains("typedef struct ClField ClField;"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/chern_lab.h");
    match std::process::Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c", header]).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler on PATH; skipped"),
    }
}
