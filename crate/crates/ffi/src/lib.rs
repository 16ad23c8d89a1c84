//! C ABI for `oag-core`.
//!
//! Specs and formulas cross the boundary as opaque handles. Every call
//! returns an [`OagStatus`]; on failure the message is available from
//! [`oag_last_error`] on the same thread. Strings returned through out
//! parameters are owned by the caller and released with [`oag_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use oag_core::cli::parse_system;
use oag_core::invariants::{classify, dp_rank};
use oag_core::qe::eliminate_all;
use oag_core::solver::{solve, SolveOutcome};
use oag_core::syntax::{parse_formula, parse_spec, Formula};
use oag_core::{ExtNat, GroupSpec, OagError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OagStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    NotComputable = 4,
    /// A precondition, hypothesis or other domain error.
    Domain = 5,
    /// The enumeration cap or atom budget was exceeded.
    Limit = 6,
    Internal = 7,
    Panic = 8,
}

/// A parsed group spec.
pub struct OagSpec {
    spec: GroupSpec,
}

/// A formula parsed against a spec.
pub struct OagFormula {
    formula: Formula,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &OagError) -> OagStatus {
    match e {
        OagError::Parse { .. } => OagStatus::Parse,
        OagError::NotComputable => OagStatus::NotComputable,
        OagError::EnumerationCap { .. } | OagError::Budget { .. } => OagStatus::Limit,
        OagError::Internal(_) => OagStatus::Internal,
        _ => OagStatus::Domain,
    }
}

struct Fail(OagStatus, String);

impl From<OagError> for Fail {
    fn from(e: OagError) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording the error message and mapping panics.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OagStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OagStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside oag-core");
            OagStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(OagStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(OagStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(OagStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(OagStatus::NullPointer, format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(OagStatus::Internal, "output holds a nul byte".into()))?;
    if out.is_null() {
        return Err(Fail(OagStatus::NullPointer, "output pointer is null".into()));
    }
    out.write(c.into_raw());
    Ok(())
}

/// The message of the last failed call on this thread, or null. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn oag_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn oag_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses the spec text format.
///
/// # Safety
/// `text` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oag_spec_parse(text: *const c_char, out: *mut *mut OagSpec) -> OagStatus {
    guard(|| {
        let spec = parse_spec(self::text(text, "spec text")?)?;
        put(out, Box::into_raw(Box::new(OagSpec { spec })), "out")
    })
}

/// # Safety
/// `spec` must be null or a handle from [`oag_spec_parse`], freed once.
#[no_mangle]
pub unsafe extern "C" fn oag_spec_free(spec: *mut OagSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Number of archimedean components, not counting an ω-tower.
///
/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oag_spec_components(spec: *const OagSpec, out: *mut usize) -> OagStatus {
    guard(|| put(out, handle(spec, "spec")?.spec.k(), "out"))
}

/// Writes the dp-rank to `rank` and whether it is finite to `finite`;
/// `rank` is 0 when it is infinite.
///
/// # Safety
/// `spec` must be a live handle; `rank` and `finite` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oag_spec_dp_rank(spec: *const OagSpec, rank: *mut u64, finite: *mut bool) -> OagStatus {
    guard(|| {
        let r = dp_rank(&handle(spec, "spec")?.spec);
        put(rank, r.finite().unwrap_or(0), "rank")?;
        put(finite, r != ExtNat::Inf, "finite")
    })
}

/// `kind=<kind> dp_rank=<n|inf>`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oag_spec_classify(spec: *const OagSpec, out: *mut *mut c_char) -> OagStatus {
    guard(|| {
        let c = classify(&handle(spec, "spec")?.spec);
        put_string(out, format!("kind={} dp_rank={}", c.kind, c.dp_rank))
    })
}

/// # Safety
/// `spec` must be a live handle, `text` a nul-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn oag_formula_parse(
    spec: *const OagSpec,
    text: *const c_char,
    out: *mut *mut OagFormula,
) -> OagStatus {
    guard(|| {
        let formula = parse_formula(self::text(text, "formula text")?, &handle(spec, "spec")?.spec)?;
        put(out, Box::into_raw(Box::new(OagFormula { formula })), "out")
    })
}

/// # Safety
/// `f` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn oag_formula_free(f: *mut OagFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oag_formula_to_string(f: *const OagFormula, out: *mut *mut c_char) -> OagStatus {
    guard(|| put_string(out, handle(f, "formula")?.formula.to_string()))
}

/// Eliminates every quantifier of `f`; the result is a new handle.
///
/// # Safety
/// `spec` and `f` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oag_formula_eliminate(
    spec: *const OagSpec,
    f: *const OagFormula,
    out: *mut *mut OagFormula,
) -> OagStatus {
    guard(|| {
        let formula = eliminate_all(&handle(f, "formula")?.formula, &handle(spec, "spec")?.spec)?;
        put(out, Box::into_raw(Box::new(OagFormula { formula })), "out")
    })
}

/// Solves a congruence system given one `x == a mod H` per line. Writes
/// `SOLVABLE base=<element> modulus=<subgroup>` or `UNSOLVABLE pair=(i,j)`.
///
/// # Safety
/// `spec` must be a live handle, `system` a nul-terminated string and `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn oag_solve(spec: *const OagSpec, system: *const c_char, out: *mut *mut c_char) -> OagStatus {
    guard(|| {
        let g = &handle(spec, "spec")?.spec;
        let sys = parse_system(self::text(system, "system text")?, g)?;
        let line = match solve(g, &sys)? {
            SolveOutcome::Solvable(c) => format!("SOLVABLE {c}"),
            SolveOutcome::Unsolvable { pair: (i, j) } => format!("UNSOLVABLE pair=({i},{j})"),
        };
        put_string(out, line)
    })
}
