//! C interface to the classification engine. All functions return a status
//! code; results travel through out-parameters. Matrix values are opaque
//! handles that must be released with [`bott_matrix_free`], and returned
//! strings with [`bott_string_free`]. After any non-zero status,
//! [`bott_last_error_message`] describes the failure for the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bott_core::report::{build_report, render_json};
use bott_core::ring::find_isomorphism;
use bott_core::{classify_dimension, BottMatrix};

pub const BOTT_OK: i32 = 0;
pub const BOTT_ERR_NULL_ARGUMENT: i32 = 1;
pub const BOTT_ERR_PARSE: i32 = 2;
pub const BOTT_ERR_DIMENSION: i32 = 3;
pub const BOTT_ERR_BUFFER_TOO_SMALL: i32 = 4;
pub const BOTT_ERR_INTERNAL: i32 = 5;

/// Opaque matrix value.
pub struct BottMatrixHandle {
    inner: BottMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Message of the most recent failure on this thread, or null when the
/// last call succeeded. The pointer stays valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn bott_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

fn guarded<F: FnOnce() -> i32>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic".to_string());
            BOTT_ERR_INTERNAL
        }
    }
}

/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bott_matrix_parse(
    text: *const c_char,
    out: *mut *mut BottMatrixHandle,
) -> i32 {
    guarded(|| {
        if text.is_null() || out.is_null() {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        }
        let s = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("matrix text is not valid UTF-8".to_string());
                return BOTT_ERR_PARSE;
            }
        };
        match BottMatrix::parse(s) {
            Ok(m) => {
                unsafe {
                    *out = Box::into_raw(Box::new(BottMatrixHandle { inner: m }));
                }
                clear_error();
                BOTT_OK
            }
            Err(e) => {
                set_error(e.to_string());
                BOTT_ERR_PARSE
            }
        }
    })
}

/// Releases a handle returned by this library. Null is accepted.
///
/// # Safety
/// `m` must be a handle from this library that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn bott_matrix_free(m: *mut BottMatrixHandle) {
    if !m.is_null() {
        drop(unsafe { Box::from_raw(m) });
    }
}

unsafe fn borrow<'a>(m: *const BottMatrixHandle) -> Option<&'a BottMatrix> {
    unsafe { m.as_ref() }.map(|h| &h.inner)
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bott_matrix_dim(m: *const BottMatrixHandle, out: *mut usize) -> i32 {
    guarded(|| {
        let (Some(matrix), false) = (unsafe { borrow(m) }, out.is_null()) else {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        };
        unsafe { *out = matrix.n() };
        clear_error();
        BOTT_OK
    })
}

/// Row-major entry bitmask key of the matrix.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bott_matrix_key(m: *const BottMatrixHandle, out: *mut u64) -> i32 {
    guarded(|| {
        let (Some(matrix), false) = (unsafe { borrow(m) }, out.is_null()) else {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        };
        unsafe { *out = matrix.key() };
        clear_error();
        BOTT_OK
    })
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bott_matrix_is_orientable(
    m: *const BottMatrixHandle,
    out: *mut bool,
) -> i32 {
    guarded(|| {
        let (Some(matrix), false) = (unsafe { borrow(m) }, out.is_null()) else {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        };
        unsafe { *out = matrix.is_orientable() };
        clear_error();
        BOTT_OK
    })
}

/// Writes the type signature parts into `out` (capacity `cap`) and the
/// part count into `written`. When the capacity is too small nothing is
/// written except the required count.
///
/// # Safety
/// `m` must be a live handle; `out` must point to at least `cap` slots;
/// `written` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bott_matrix_type_signature(
    m: *const BottMatrixHandle,
    out: *mut usize,
    cap: usize,
    written: *mut usize,
) -> i32 {
    guarded(|| {
        let (Some(matrix), false) = (unsafe { borrow(m) }, written.is_null()) else {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        };
        let parts = matrix.type_signature();
        let parts = parts.parts();
        unsafe { *written = parts.len() };
        if parts.len() > cap {
            set_error(format!(
                "type signature needs {} slots, got {cap}",
                parts.len()
            ));
            return BOTT_ERR_BUFFER_TOO_SMALL;
        }
        if out.is_null() {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        }
        for (i, &p) in parts.iter().enumerate() {
            unsafe { *out.add(i) = p };
        }
        clear_error();
        BOTT_OK
    })
}

/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bott_matrix_normal_form(
    m: *const BottMatrixHandle,
    out: *mut *mut BottMatrixHandle,
) -> i32 {
    guarded(|| {
        let (Some(matrix), false) = (unsafe { borrow(m) }, out.is_null()) else {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        };
        let (nf, _) = matrix.normal_form();
        unsafe { *out = Box::into_raw(Box::new(BottMatrixHandle { inner: nf })) };
        clear_error();
        BOTT_OK
    })
}

/// Size of the conjugation orbit: over all permutations, or restricted to
/// conjugates that are again normal forms.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bott_matrix_orbit_size(
    m: *const BottMatrixHandle,
    normal_forms_only: bool,
    out: *mut usize,
) -> i32 {
    guarded(|| {
        let (Some(matrix), false) = (unsafe { borrow(m) }, out.is_null()) else {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        };
        let size = if normal_forms_only {
            matrix.normal_form_orbit().len()
        } else {
            matrix.permutation_orbit().len()
        };
        unsafe { *out = size };
        clear_error();
        BOTT_OK
    })
}

/// Formats the matrix in the text file format accepted by
/// [`bott_matrix_parse`].
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bott_matrix_format(
    m: *const BottMatrixHandle,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let (Some(matrix), false) = (unsafe { borrow(m) }, out.is_null()) else {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        };
        let text = matrix.to_string();
        let c = CString::new(text).expect("matrix text has no NUL bytes");
        unsafe { *out = c.into_raw() };
        clear_error();
        BOTT_OK
    })
}

/// Decides whether the manifolds of two matrices are diffeomorphic, by
/// testing their cohomology rings for graded isomorphism.
///
/// # Safety
/// `a` and `b` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bott_isomorphic(
    a: *const BottMatrixHandle,
    b: *const BottMatrixHandle,
    out: *mut bool,
) -> i32 {
    guarded(|| {
        let (Some(ma), Some(mb), false) =
            (unsafe { borrow(a) }, unsafe { borrow(b) }, out.is_null())
        else {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        };
        if ma.n() != mb.n() {
            unsafe { *out = false };
            clear_error();
            return BOTT_OK;
        }
        let (na, _) = ma.normal_form();
        let (nb, _) = mb.normal_form();
        match find_isomorphism(&na, &nb) {
            Ok(result) => {
                unsafe { *out = result.is_some() };
                clear_error();
                BOTT_OK
            }
            Err(e) => {
                set_error(e.to_string());
                BOTT_ERR_INTERNAL
            }
        }
    })
}

/// Classifies one dimension and returns the full report as a JSON string.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bott_classify_json(dim: usize, out: *mut *mut c_char) -> i32 {
    guarded(|| {
        if out.is_null() {
            set_error("null argument".to_string());
            return BOTT_ERR_NULL_ARGUMENT;
        }
        let start = std::time::Instant::now();
        match classify_dimension(dim) {
            Ok(c) => {
                let report = build_report(&c, start.elapsed().as_millis() as u64);
                let json = render_json(&report);
                let c = CString::new(json).expect("JSON has no NUL bytes");
                unsafe { *out = c.into_raw() };
                clear_error();
                BOTT_OK
            }
            Err(e) => {
                set_error(e.to_string());
                BOTT_ERR_DIMENSION
            }
        }
    })
}

/// Releases a string returned by this library. Null is accepted.
///
/// # Safety
/// `s` must be a string from this library that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn bott_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
