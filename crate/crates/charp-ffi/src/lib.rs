//! C ABI for the charp engine.
//!
//! Rings and scenario reports are exposed as opaque handles created by
//! `charp_ring_*` constructors and `charp_run` and released with the matching `*_free` function.
//! Every function returns a [`CharpStatus`]; on failure a message is available
//! from [`charp_last_error`] on the calling thread.

use charp::ralg::{diagonalize, Mat, Ring};
use charp::verify::{self, Params, Report};
use charp::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

/// Result codes returned by every function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    UnknownScenario = 4,
    Budget = 5,
    NotInvertible = 6,
    Internal = 7,
    Panic = 8,
}

/// A coefficient ring.
pub struct CharpRing(Ring);

/// The report of one scenario run.
pub struct CharpReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CharpStatus {
    match e {
        Error::UnknownScenario(_) => CharpStatus::UnknownScenario,
        Error::Budget(_) => CharpStatus::Budget,
        Error::NotInvertible(_) => CharpStatus::NotInvertible,
        Error::Internal(_) | Error::NotAComplex(_) | Error::NotExact(_) => CharpStatus::Internal,
        _ => CharpStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (CharpStatus, String)>) -> CharpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CharpStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside charp");
            CharpStatus::Panic
        }
    }
}

fn lift<T>(r: charp::Result<T>) -> Result<T, (CharpStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (CharpStatus, String) {
    (CharpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, (CharpStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (CharpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ring_arg<'a>(r: *const CharpRing) -> Result<&'a Ring, (CharpStatus, String)> {
    r.as_ref().map(|r| &r.0).ok_or_else(|| null("ring"))
}

fn elem_arg(ring: &Ring, x: u64) -> Result<u64, (CharpStatus, String)> {
    if x < ring.order() {
        Ok(x)
    } else {
        Err((
            CharpStatus::InvalidArgument,
            format!("element {x} outside {}", ring.name()),
        ))
    }
}

/// The engine version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn charp_version() -> *const c_char {
    static V: OnceLock<CString> = OnceLock::new();
    V.get_or_init(|| CString::new(charp::VERSION).expect("version has no NUL"))
        .as_ptr()
}

/// The message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next charp call on the same thread.
#[no_mangle]
pub extern "C" fn charp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn new_ring(out: *mut *mut CharpRing, make: impl FnOnce() -> charp::Result<Ring>) -> CharpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let r = lift(make())?;
        // SAFETY: `out` is non-null and the caller guarantees it is writable.
        unsafe { *out = Box::into_raw(Box::new(CharpRing(r))) };
        Ok(())
    })
}

/// Create the prime field `F_p`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn charp_ring_fp(p: u64, out: *mut *mut CharpRing) -> CharpStatus {
    new_ring(out, || Ring::fp(p))
}

/// Create the Galois field `F_{p^r}` with the default modulus.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn charp_ring_gf(p: u64, r: u32, out: *mut *mut CharpRing) -> CharpStatus {
    new_ring(out, || Ring::gf(p, r as usize))
}

/// Create `Z/p^e`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn charp_ring_zpe(p: u64, e: u32, out: *mut *mut CharpRing) -> CharpStatus {
    new_ring(out, || Ring::zpe(p, e))
}

/// Release a ring handle. Passing null is a no-op.
///
/// # Safety
/// `ring` must be null or a handle returned by a `charp_ring_*` constructor
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn charp_ring_free(ring: *mut CharpRing) {
    if !ring.is_null() {
        drop(Box::from_raw(ring));
    }
}

/// Number of elements of the ring; elements are encoded as `0..order`.
///
/// # Safety
/// `ring` must be a live ring handle and `out` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn charp_ring_order(ring: *const CharpRing, out: *mut u64) -> CharpStatus {
    guard(|| {
        let r = ring_arg(ring)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.order();
        Ok(())
    })
}

/// Ring operations available through [`charp_ring_op`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharpOp {
    Add = 0,
    Sub = 1,
    Mul = 2,
    /// Inverse of `a`; `b` is ignored.
    Inv = 3,
}

/// Apply a ring operation to encoded elements.
///
/// # Safety
/// `ring` must be a live ring handle, `op` one of the declared [`CharpOp`]
/// values and `out` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn charp_ring_op(
    ring: *const CharpRing,
    op: CharpOp,
    a: u64,
    b: u64,
    out: *mut u64,
) -> CharpStatus {
    guard(|| {
        let r = ring_arg(ring)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let a = elem_arg(r, a)?;
        let b = if op == CharpOp::Inv {
            0
        } else {
            elem_arg(r, b)?
        };
        *out = match op {
            CharpOp::Add => r.add(a, b),
            CharpOp::Sub => r.sub(a, b),
            CharpOp::Mul => r.mul(a, b),
            CharpOp::Inv => lift(r.inv(a))?,
        };
        Ok(())
    })
}

unsafe fn matrix_arg(
    ring: &Ring,
    rows: usize,
    cols: usize,
    data: *const u64,
) -> Result<Mat, (CharpStatus, String)> {
    let n = rows
        .checked_mul(cols)
        .ok_or((CharpStatus::InvalidArgument, "matrix too large".to_string()))?;
    if data.is_null() && n > 0 {
        return Err(null("data"));
    }
    let flat: &[u64] = if n == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(data, n)
    };
    let entries = (0..rows)
        .map(|i| flat[i * cols..(i + 1) * cols].to_vec())
        .collect();
    lift(Mat::from_rows(ring, rows, cols, entries))
}

/// Rank of a `rows x cols` matrix over a field, given row-major.
///
/// # Safety
/// `ring` must be a live ring handle, `data` must point to `rows * cols`
/// readable elements (may be null when that product is zero) and `out` must be
/// a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn charp_matrix_rank(
    ring: *const CharpRing,
    rows: usize,
    cols: usize,
    data: *const u64,
    out: *mut usize,
) -> CharpStatus {
    guard(|| {
        let r = ring_arg(ring)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lift(matrix_arg(r, rows, cols, data)?.rank())?;
        Ok(())
    })
}

/// Cokernel of a matrix over a local ring such as `Z/p^e`: writes the
/// exponents `e_i` of the cyclic summands `R/p^{e_i}` (ascending) to `exps`
/// and their number to `len`. At most `cap` exponents are written; if more
/// are needed `len` receives the required count and `InvalidArgument` is
/// returned.
///
/// # Safety
/// `ring` must be a live ring handle, `data` must point to `rows * cols`
/// readable elements, `exps` must point to `cap` writable slots (may be null
/// when `cap` is zero) and `len` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn charp_matrix_cokernel(
    ring: *const CharpRing,
    rows: usize,
    cols: usize,
    data: *const u64,
    exps: *mut u32,
    cap: usize,
    len: *mut usize,
) -> CharpStatus {
    guard(|| {
        let r = ring_arg(ring)?;
        let len = len.as_mut().ok_or_else(|| null("len"))?;
        let e = lift(diagonalize(&matrix_arg(r, rows, cols, data)?))?
            .cokernel
            .exponents();
        *len = e.len();
        if e.len() > cap {
            return Err((
                CharpStatus::InvalidArgument,
                format!("{} exponents do not fit in {cap}", e.len()),
            ));
        }
        if !e.is_empty() {
            if exps.is_null() {
                return Err(null("exps"));
            }
            std::slice::from_raw_parts_mut(exps, e.len()).copy_from_slice(&e);
        }
        Ok(())
    })
}

fn scenario_ids() -> &'static [CString] {
    static IDS: OnceLock<Vec<CString>> = OnceLock::new();
    IDS.get_or_init(|| {
        verify::registry()
            .iter()
            .map(|s| CString::new(s.id).expect("ids have no NUL"))
            .collect()
    })
}

/// Number of registered scenarios.
#[no_mangle]
pub extern "C" fn charp_scenario_count() -> usize {
    scenario_ids().len()
}

/// Id of scenario `index` as a static string, or null when out of range.
#[no_mangle]
pub extern "C" fn charp_scenario_id(index: usize) -> *const c_char {
    scenario_ids()
        .get(index)
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Run a scenario. Negative `p`, `q`, `dim` or `seed` select the default.
/// The budget comes from `CHARP_BUDGET_PROFILE`.
///
/// # Safety
/// `id` must be a NUL-terminated string and `out` a valid pointer to writable
/// storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn charp_run(
    id: *const c_char,
    p: i64,
    q: i64,
    dim: i64,
    seed: i64,
    out: *mut *mut CharpReport,
) -> CharpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let id = str_arg(id, "id")?;
        let opt = |x: i64| u64::try_from(x).ok();
        let params = Params {
            p: opt(p),
            q: opt(q),
            dim: opt(dim).map(|d| d as usize),
            seed: opt(seed),
        };
        let r = lift(verify::run(id, &params))?;
        *out = Box::into_raw(Box::new(CharpReport(r)));
        Ok(())
    })
}

/// Whether the report passed (1) or not (0); skipped runs never pass.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn charp_report_pass(report: *const CharpReport) -> i32 {
    report.as_ref().map_or(0, |r| i32::from(r.0.pass))
}

/// Whether the run was skipped for exceeding the budget (1) or not (0).
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn charp_report_skipped(report: *const CharpReport) -> i32 {
    report.as_ref().map_or(0, |r| i32::from(r.0.skipped))
}

/// The report as a JSON string, owned by the caller and released with
/// [`charp_string_free`].
///
/// # Safety
/// `report` must be a live report handle and `out` a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn charp_report_json(
    report: *const CharpReport,
    out: *mut *mut c_char,
) -> CharpStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = serde_json::to_string(&r.0).map_err(|e| (CharpStatus::Internal, e.to_string()))?;
        *out = CString::new(s)
            .map_err(|e| (CharpStatus::Internal, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// Release a report handle. Passing null is a no-op.
///
/// # Safety
/// `report` must be null or a handle returned by [`charp_run`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn charp_report_free(report: *mut CharpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Release a string returned by this library. Passing null is a no-op.
///
/// # Safety
/// `s` must be null or a string returned by [`charp_report_json`] that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn charp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
