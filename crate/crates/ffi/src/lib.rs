//! C ABI over `k3twist`.
//!
//! Objects are opaque handles released with their `*_free` function.
//! Strings returned through out-parameters are NUL-terminated UTF-8 and
//! must be released with [`k3_string_free`]. Every entry point returns a
//! [`K3Status`]; on failure [`k3_last_error_message`] describes the error
//! raised on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use k3twist::criteria::{self, VerdictKind};
use k3twist::elliptic::{certify_positive_rank, Family, RankOutcome};
use k3twist::facts::ExternalFactTable;
use k3twist::surface::{self, Atlas, SprCertificate, SurfaceFamily};
use k3twist::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[allow(non_camel_case_types)]
pub enum K3Status {
    K3_OK = 0,
    /// The search ended without a certificate; not an error.
    K3_INCONCLUSIVE = 1,
    K3_NULL_POINTER = 2,
    K3_INVALID_ARGUMENT = 3,
    K3_NOT_SQUAREFREE = 4,
    K3_OFF_CURVE = 5,
    K3_BUDGET_EXCEEDED = 6,
    K3_EXCEPTIONAL = 7,
    K3_INTERNAL = 8,
}

use K3Status::*;

/// A surface `d(1 + a²T⁴)Y² = X³ - X`.
pub struct K3Family {
    inner: SurfaceFamily,
}

/// A verified SPR certificate.
pub struct K3Certificate {
    inner: SprCertificate,
}

/// Exact surface points generated from a certificate.
pub struct K3Atlas {
    inner: Atlas,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> K3Status {
    match e {
        Error::NotSquarefree(_) => K3_NOT_SQUAREFREE,
        Error::OffCurve | Error::SingularCurve => K3_OFF_CURVE,
        Error::FactorizationBudget(_) | Error::PrecisionBudget(_) => K3_BUDGET_EXCEEDED,
        Error::ExceptionalSet | Error::BranchLocus => K3_EXCEPTIONAL,
        Error::LedgerViolation(_) | Error::Io(_) => K3_INTERNAL,
        _ => K3_INVALID_ARGUMENT,
    }
}

/// Run `f`, recording errors and panics for `k3_last_error_message`.
fn guard(f: impl FnOnce() -> Result<K3Status, Error>) -> K3Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            K3_INTERNAL
        }
    }
}

fn null_error(what: &str) -> K3Status {
    set_error(format!("null pointer: {what}"));
    K3_NULL_POINTER
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no NUL").into_raw()
}

fn to_json<T: serde::Serialize + ?Sized>(v: &T) -> Result<String, Error> {
    serde_json::to_string(v).map_err(|e| Error::Io(e.to_string()))
}

fn facts(allow: bool) -> Option<ExternalFactTable> {
    allow.then(ExternalFactTable::builtin)
}

/// Message of the last error on this thread, or NULL. The caller owns
/// the returned string.
#[no_mangle]
pub extern "C" fn k3_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn k3_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn k3_family_new(d: i64, a: i64, out: *mut *mut K3Family) -> K3Status {
    if out.is_null() {
        return null_error("out");
    }
    *out = ptr::null_mut();
    guard(|| {
        let inner = SurfaceFamily::new(d, a)?;
        *out = Box::into_raw(Box::new(K3Family { inner }));
        Ok(K3_OK)
    })
}

/// # Safety
/// `f` must come from `k3_family_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn k3_family_free(f: *mut K3Family) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Search for an SPR(C) certificate. Returns `K3_INCONCLUSIVE` and sets
/// `*out` to NULL when some leg has no witness within `height`.
///
/// # Safety
/// `family` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn k3_spr_check(
    family: *const K3Family,
    c: i64,
    height: u64,
    allow_external_facts: bool,
    out: *mut *mut K3Certificate,
) -> K3Status {
    if family.is_null() || out.is_null() {
        return null_error("family/out");
    }
    *out = ptr::null_mut();
    let family = &(*family).inner;
    guard(|| {
        let table = facts(allow_external_facts);
        let report = surface::spr_check(family, c, height, table.as_ref())?;
        match report.certificate {
            Some(inner) => {
                *out = Box::into_raw(Box::new(K3Certificate { inner }));
                Ok(K3_OK)
            }
            None => Ok(K3_INCONCLUSIVE),
        }
    })
}

/// # Safety
/// `cert` must come from `k3_spr_check` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn k3_certificate_free(cert: *mut K3Certificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Whether the certificate relies on a curated rank fact.
///
/// # Safety
/// `cert` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn k3_certificate_uses_external_facts(cert: *const K3Certificate) -> bool {
    !cert.is_null() && (*cert).inner.uses_external_facts()
}

/// # Safety
/// `cert` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn k3_certificate_to_json(cert: *const K3Certificate, out: *mut *mut c_char) -> K3Status {
    if cert.is_null() || out.is_null() {
        return null_error("cert/out");
    }
    *out = ptr::null_mut();
    let cert = &(*cert).inner;
    guard(|| {
        *out = into_c_string(to_json(cert)?);
        Ok(K3_OK)
    })
}

/// # Safety
/// `cert` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn k3_atlas_generate(
    cert: *const K3Certificate,
    max_i: u32,
    max_j: u32,
    out: *mut *mut K3Atlas,
) -> K3Status {
    if cert.is_null() || out.is_null() {
        return null_error("cert/out");
    }
    *out = ptr::null_mut();
    let cert = &(*cert).inner;
    guard(|| {
        let inner = surface::atlas_generate(cert, (max_i, max_j))?;
        *out = Box::into_raw(Box::new(K3Atlas { inner }));
        Ok(K3_OK)
    })
}

/// # Safety
/// `atlas` must come from `k3_atlas_generate` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn k3_atlas_free(atlas: *mut K3Atlas) {
    if !atlas.is_null() {
        drop(Box::from_raw(atlas));
    }
}

/// Number of points, 0 for NULL.
///
/// # Safety
/// `atlas` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn k3_atlas_len(atlas: *const K3Atlas) -> usize {
    if atlas.is_null() {
        0
    } else {
        (*atlas).inner.points.len()
    }
}

/// Point `index` as `{"x": "...", "y": "...", "t": "...", "exceptional": false}`.
///
/// # Safety
/// `atlas` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn k3_atlas_point_json(atlas: *const K3Atlas, index: usize, out: *mut *mut c_char) -> K3Status {
    if atlas.is_null() || out.is_null() {
        return null_error("atlas/out");
    }
    *out = ptr::null_mut();
    let atlas = &(*atlas).inner;
    guard(|| {
        let p = atlas
            .points
            .get(index)
            .ok_or_else(|| Error::InvalidParameter(format!("index {index} out of range")))?;
        *out = into_c_string(to_json(p)?);
        Ok(K3_OK)
    })
}

/// Root number of `y² = x³ - D²x` for positive squarefree `D`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn k3_root_number(d: i64, out: *mut i8) -> K3Status {
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        *out = criteria::root_number(d)?;
        Ok(K3_OK)
    })
}

/// Local solubility of `C·s² = 1 + t⁴` from the congruence criterion.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn k3_solubility_a1(c: i64, out: *mut bool) -> K3Status {
    if out.is_null() {
        return null_error("out");
    }
    guard(|| {
        *out = criteria::solubility_a1(c)?.kind == VerdictKind::Soluble;
        Ok(K3_OK)
    })
}

/// Positive-rank search on `D·y² = x³ - x`; `*out` receives the outcome
/// as JSON in both the certified and the inconclusive case.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn k3_twist_rank_json(
    d: i64,
    height: u64,
    allow_external_facts: bool,
    out: *mut *mut c_char,
) -> K3Status {
    if out.is_null() {
        return null_error("out");
    }
    *out = ptr::null_mut();
    guard(|| {
        let table = facts(allow_external_facts);
        let outcome = certify_positive_rank(d, Family::Congruent, height, table.as_ref())?;
        *out = into_c_string(to_json(&outcome)?);
        Ok(match outcome {
            RankOutcome::Certified(_) => K3_OK,
            RankOutcome::Inconclusive { .. } => K3_INCONCLUSIVE,
        })
    })
}
