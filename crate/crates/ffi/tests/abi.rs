use std::ffi::{CStr, c_char};
use std::ptr;

use k3twist_ffi::*;
use K3Status::*;

unsafe fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    k3_string_free(s);
    out
}

#[test]
fn spr_certificate_and_atlas() {
    unsafe {
        let mut fam = ptr::null_mut();
        assert_eq!(k3_family_new(3, 2, &mut fam), K3_OK);
        let mut cert = ptr::null_mut();
        assert_eq!(k3_spr_check(fam, 5, 10_000, false, &mut cert), K3_OK);
        assert!(!k3_certificate_uses_external_facts(cert));

        let mut json = ptr::null_mut();
        assert_eq!(k3_certificate_to_json(cert, &mut json), K3_OK);
        let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(v["c"], 5);

        let mut atlas = ptr::null_mut();
        assert_eq!(k3_atlas_generate(cert, 10, 3, &mut atlas), K3_OK);
        let n = k3_atlas_len(atlas);
        assert!(n >= 30);
        let mut p = ptr::null_mut();
        assert_eq!(k3_atlas_point_json(atlas, 0, &mut p), K3_OK);
        let v: serde_json::Value = serde_json::from_str(&take(p)).unwrap();
        assert!(v["x"].is_string() && v["t"].is_string());
        assert_eq!(k3_atlas_point_json(atlas, n, &mut p), K3_INVALID_ARGUMENT);
        assert!(p.is_null());

        k3_atlas_free(atlas);
        k3_certificate_free(cert);
        k3_family_free(fam);
    }
}

#[test]
fn inconclusive_and_errors() {
    unsafe {
        let mut fam = ptr::null_mut();
        assert_eq!(k3_family_new(4, 1, &mut fam), K3_NOT_SQUAREFREE);
        assert!(fam.is_null());
        let msg = take(k3_last_error_message());
        assert!(msg.contains('4'), "{msg}");

        assert_eq!(k3_family_new(3, 2, &mut fam), K3_OK);
        let mut cert = ptr::null_mut();
        assert_eq!(k3_spr_check(fam, 3, 500, false, &mut cert), K3_INCONCLUSIVE);
        assert!(cert.is_null());
        assert_eq!(k3_spr_check(ptr::null(), 3, 500, false, &mut cert), K3_NULL_POINTER);
        k3_family_free(fam);

        let mut json = ptr::null_mut();
        assert_eq!(k3_twist_rank_json(1, 200, false, &mut json), K3_INCONCLUSIVE);
        let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(v["verdict"], "inconclusive");
    }
}

#[test]
fn scalar_queries() {
    unsafe {
        let mut w = 0i8;
        assert_eq!(k3_root_number(5, &mut w), K3_OK);
        assert_eq!(w, -1);
        assert_eq!(k3_root_number(17, &mut w), K3_OK);
        assert_eq!(w, 1);
        let mut ok = false;
        assert_eq!(k3_solubility_a1(17, &mut ok), K3_OK);
        assert!(ok);
        assert_eq!(k3_solubility_a1(3, &mut ok), K3_OK);
        assert!(!ok);
        assert_eq!(k3_solubility_a1(0, &mut ok), K3_INVALID_ARGUMENT);

        let mut json = ptr::null_mut();
        assert_eq!(k3_twist_rank_json(5, 100, false, &mut json), K3_OK);
        let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(v["witness"], serde_json::json!({"x": "-4", "y": "6"}));
    }
}

#[test]
fn header_declares_entry_points() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/k3twist.h")).unwrap();
    for name in [
        "k3_family_new",
        "k3_spr_check",
        "k3_atlas_point_json",
        "k3_string_free",
        "typedef struct K3Family K3Family",
        "K3_INCONCLUSIVE",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
