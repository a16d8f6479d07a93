//! C ABI over vvmf: opaque handles, status codes, owned strings.
//!
//! Every function returns a [`VvmfStatus`]; outputs go through pointer arguments.
//! Strings handed out must be released with [`vvmf_string_free`], handles with their `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use vvmf::conformal::{check_conformal, SMatrix};
use vvmf::families::builtin_instance;
use vvmf::frobenius::{solve_exponents, to_q_expansion, CharacterVectorExpansion};
use vvmf::hypergeom::{dim_m0, Rank2Params};
use vvmf::mlde::ExponentTuple;
use vvmf::ring::{fmt_q, parse_q, DEFAULT_PRECISION, Q};
use vvmf::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VvmfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Domain = 4,
    OutOfRange = 5,
    Panic = 6,
}

/// Opaque character-vector expansion.
pub struct VvmfExpansion {
    inner: CharacterVectorExpansion,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: VvmfStatus, msg: &str) -> VvmfStatus {
    set_error(msg);
    status
}

fn domain(e: Error) -> VvmfStatus {
    match e {
        Error::Parse(m) => fail(VvmfStatus::Parse, &m),
        other => fail(VvmfStatus::Domain, &other.to_string()),
    }
}

fn guard(f: impl FnOnce() -> VvmfStatus) -> VvmfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(VvmfStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, VvmfStatus> {
    if p.is_null() {
        return Err(fail(VvmfStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(VvmfStatus::InvalidUtf8, "argument is not UTF-8"))
}

fn rationals(s: &str) -> Result<Vec<Q>, VvmfStatus> {
    s.split(',').map(|x| parse_q(x.trim()).map_err(domain)).collect()
}

unsafe fn give_string(s: String, out: *mut *mut c_char) -> VvmfStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            VvmfStatus::Ok
        }
        Err(_) => fail(VvmfStatus::Domain, "string contains NUL"),
    }
}

unsafe fn give_expansion(x: CharacterVectorExpansion, out: *mut *mut VvmfExpansion) -> VvmfStatus {
    *out = Box::into_raw(Box::new(VvmfExpansion { inner: x }));
    VvmfStatus::Ok
}

/// Message for the most recent failure on this thread; valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn vvmf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn vvmf_status_name(status: VvmfStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        VvmfStatus::Ok => b"ok\0",
        VvmfStatus::NullPointer => b"null pointer\0",
        VvmfStatus::InvalidUtf8 => b"invalid utf-8\0",
        VvmfStatus::Parse => b"parse error\0",
        VvmfStatus::Domain => b"domain error\0",
        VvmfStatus::OutOfRange => b"index out of range\0",
        VvmfStatus::Panic => b"internal panic\0",
    };
    s.as_ptr() as *const c_char
}

/// Solve the minimal MLDE of rank 2 or 4 for comma-separated rational `exponents`,
/// normalized so every coordinate starts with 1.
///
/// # Safety
/// `exponents` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vvmf_solve(
    rank: u32,
    exponents: *const c_char,
    n_terms: u32,
    out: *mut *mut VvmfExpansion,
) -> VvmfStatus {
    guard(|| {
        if out.is_null() {
            return fail(VvmfStatus::NullPointer, "null output");
        }
        let e = match str_arg(exponents).and_then(rationals) {
            Ok(e) => e,
            Err(s) => return s,
        };
        let n = n_terms as usize;
        let x = ExponentTuple::new(e)
            .and_then(|t| solve_exponents(rank as usize, &t, n))
            .and_then(|s| to_q_expansion(&s, n, None))
            .and_then(|x| x.normalized());
        match x {
            Ok(x) => give_expansion(x, out),
            Err(e) => domain(e),
        }
    })
}

/// Expansion of a named built-in instance with its published normalization.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vvmf_builtin(name: *const c_char, n_terms: u32, out: *mut *mut VvmfExpansion) -> VvmfStatus {
    guard(|| {
        if out.is_null() {
            return fail(VvmfStatus::NullPointer, "null output");
        }
        let name = match str_arg(name) {
            Ok(n) => n,
            Err(s) => return s,
        };
        match builtin_instance(name, DEFAULT_PRECISION).and_then(|b| b.solve(n_terms as usize)) {
            Ok(x) => give_expansion(x, out),
            Err(e) => domain(e),
        }
    })
}

/// Number of coordinates.
///
/// # Safety
/// `x` must come from this library and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn vvmf_expansion_rank(x: *const VvmfExpansion, out: *mut u32) -> VvmfStatus {
    if x.is_null() || out.is_null() {
        return fail(VvmfStatus::NullPointer, "null argument");
    }
    *out = (&*x).inner.rank() as u32;
    VvmfStatus::Ok
}

/// Coefficient `i` of coordinate `j` as a `"p/q"` string.
///
/// # Safety
/// `x` must be a live handle; `out` must be writable. Free the result with `vvmf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn vvmf_expansion_coeff(
    x: *const VvmfExpansion,
    j: u32,
    i: u32,
    out: *mut *mut c_char,
) -> VvmfStatus {
    if x.is_null() || out.is_null() {
        return fail(VvmfStatus::NullPointer, "null argument");
    }
    let s = &(&*x).inner.series;
    match s.get(j as usize).and_then(|s| s.coeffs().get(i as usize)) {
        Some(c) => give_string(fmt_q(c), out),
        None => fail(VvmfStatus::OutOfRange, "coefficient index out of range"),
    }
}

/// Leading exponent of coordinate `j` as a `"p/q"` string.
///
/// # Safety
/// As for `vvmf_expansion_coeff`.
#[no_mangle]
pub unsafe extern "C" fn vvmf_expansion_exponent(x: *const VvmfExpansion, j: u32, out: *mut *mut c_char) -> VvmfStatus {
    if x.is_null() || out.is_null() {
        return fail(VvmfStatus::NullPointer, "null argument");
    }
    match (&*x).inner.exponents.get(j as usize) {
        Some(e) => give_string(fmt_q(e), out),
        None => fail(VvmfStatus::OutOfRange, "coordinate out of range"),
    }
}

/// The whole expansion as JSON.
///
/// # Safety
/// As for `vvmf_expansion_coeff`.
#[no_mangle]
pub unsafe extern "C" fn vvmf_expansion_json(x: *const VvmfExpansion, out: *mut *mut c_char) -> VvmfStatus {
    if x.is_null() || out.is_null() {
        return fail(VvmfStatus::NullPointer, "null argument");
    }
    give_string((&*x).inner.to_json().to_string(), out)
}

/// Conformal verdict against an S-matrix given as JSON `{"d": n, "entries": [[...]]}`.
/// Writes 1 for conformal, 0 otherwise.
///
/// # Safety
/// `x` must be a live handle, `smatrix_json` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vvmf_check_conformal(
    x: *const VvmfExpansion,
    smatrix_json: *const c_char,
    vacuum: u32,
    out: *mut i32,
) -> VvmfStatus {
    guard(|| {
        if x.is_null() || out.is_null() {
            return fail(VvmfStatus::NullPointer, "null argument");
        }
        let text = match str_arg(smatrix_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let v: serde_json::Value = match serde_json::from_str(text) {
            Ok(v) => v,
            Err(e) => return fail(VvmfStatus::Parse, &e.to_string()),
        };
        let x = &(&*x).inner;
        let r = SMatrix::from_json(&v, DEFAULT_PRECISION).and_then(|s| {
            let t = ExponentTuple::new(x.exponents.clone())?;
            check_conformal(x, &t, &s, vacuum as usize)
        });
        match r {
            Ok(rep) => {
                *out = rep.conformal as i32;
                VvmfStatus::Ok
            }
            Err(e) => domain(e),
        }
    })
}

/// Rank-2 extremal dim M0 for rational strings `c`, `h`; `integral` gets 1 when within 1e-6 of an integer.
///
/// # Safety
/// `c`, `h` NUL-terminated; `value`, `integral` writable.
#[no_mangle]
pub unsafe extern "C" fn vvmf_dim_m0(
    c: *const c_char,
    h: *const c_char,
    value: *mut f64,
    integral: *mut i32,
) -> VvmfStatus {
    guard(|| {
        if value.is_null() || integral.is_null() {
            return fail(VvmfStatus::NullPointer, "null output");
        }
        let (c, h) = match (str_arg(c), str_arg(h)) {
            (Ok(c), Ok(h)) => (c, h),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let r = parse_q(c)
            .and_then(|c| Ok((c, parse_q(h)?)))
            .and_then(|(c, h)| Rank2Params::new(c, h))
            .and_then(|p| dim_m0(&p, DEFAULT_PRECISION));
        match r {
            Ok(d) => {
                *value = d.value.to_f64();
                *integral = d.integral as i32;
                VvmfStatus::Ok
            }
            Err(e) => domain(e),
        }
    })
}

/// Release an expansion handle; null is ignored.
///
/// # Safety
/// `x` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vvmf_expansion_free(x: *mut VvmfExpansion) {
    if !x.is_null() {
        drop(Box::from_raw(x));
    }
}

/// Release a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vvmf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
