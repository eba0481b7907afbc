//! C interface to flowcalc.
//!
//! Posets and flows live behind opaque handles. Every function returns an
//! [`FcStatus`]; on failure [`fc_last_error`] describes what went wrong.
//! Strings handed out by the library are freed with [`fc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use flowcalc::cli::{parse_input, Input};
use flowcalc::dihomotopy::{branching_profile, check_invariance, resultat1_check, t_subdivide, Direction};
use flowcalc::flow::CombFlow;
use flowcalc::poset::FinPoset;
use flowcalc::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InputError = 4,
    BudgetExceeded = 5,
    Internal = 6,
}

/// A finite poset.
pub struct FcPoset(FinPoset);

/// A saturated flow.
pub struct FcFlow(CombFlow);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(FcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse { .. } => FcStatus::ParseError,
            Error::BudgetExceeded { .. } => FcStatus::BudgetExceeded,
            _ => FcStatus::InputError,
        };
        Fail(status, e.to_string())
    }
}

fn set_error(message: Option<String>) {
    let c = message.map(|m| CString::new(m.replace('\0', " ")).expect("no interior nul"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(None);
            FcStatus::Ok
        }
        Ok(Err(Fail(status, message))) => {
            set_error(Some(message));
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal error".into());
            set_error(Some(message));
            FcStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(FcStatus::NullArgument, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(FcStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_json(out: *mut *mut c_char, value: &impl serde::Serialize) -> Result<(), Fail> {
    let s = serde_json::to_string(value).map_err(|e| Fail(FcStatus::Internal, e.to_string()))?;
    put(out, CString::new(s).expect("json has no nul").into_raw())
}

fn check_cap(cap: usize) -> Result<(), Fail> {
    if (1..=6).contains(&cap) {
        Ok(())
    } else {
        Err(Fail(FcStatus::InputError, format!("dimension cap {cap} outside 1 to 6")))
    }
}

fn state(f: &CombFlow, name: &str) -> Result<usize, Fail> {
    Ok(f.require_state(name)?)
}

/// Parses a poset file. On success `*out` owns a new handle.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_poset_parse(text_in: *const c_char, out: *mut *mut FcPoset) -> FcStatus {
    guard(|| {
        let t = text(text_in, "text")?;
        match parse_input(t, 3)? {
            Input::Poset { poset, .. } => put(out, Box::into_raw(Box::new(FcPoset(poset)))),
            Input::Flow { .. } => Err(Fail(FcStatus::InputError, "expected a poset, found a flow".into())),
        }
    })
}

/// # Safety
/// `p` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_poset_free(p: *mut FcPoset) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of elements.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_poset_len(p: *const FcPoset, out: *mut usize) -> FcStatus {
    guard(|| put(out, borrow(p, "poset")?.0.len()))
}

/// Longest chain length between the named elements `a < b`.
///
/// # Safety
/// `p` must be a live handle, `a` and `b` nul-terminated strings, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_poset_chain_length(
    p: *const FcPoset,
    a: *const c_char,
    b: *const c_char,
    out: *mut usize,
) -> FcStatus {
    guard(|| {
        let poset = &borrow(p, "poset")?.0;
        let index = |name: &str| poset.index_of(name).ok_or_else(|| Fail(FcStatus::InputError, format!("unknown element `{name}`")));
        let (a, b) = (index(text(a, "a")?)?, index(text(b, "b")?)?);
        put(out, poset.chain_length(a, b)?)
    })
}

/// Degree and triangle checks of the exterior simplex category, as JSON.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_poset_report_json(p: *const FcPoset, out: *mut *mut c_char) -> FcStatus {
    guard(|| {
        let poset = &borrow(p, "poset")?.0;
        put_json(out, &poset.reedy_report()?)
    })
}

/// Parses and saturates a flow file. `cap` is the truncation dimension
/// (1 to 6) and `budget` bounds the words enumerated per pair and level.
///
/// # Safety
/// `text` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_flow_parse(text_in: *const c_char, cap: usize, budget: usize, out: *mut *mut FcFlow) -> FcStatus {
    guard(|| {
        check_cap(cap)?;
        let input = parse_input(text(text_in, "text")?, cap)?;
        put(out, Box::into_raw(Box::new(FcFlow(input.to_flow(budget.max(1))?))))
    })
}

/// The poset flow of `p`.
///
/// # Safety
/// `p` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_flow_from_poset(p: *const FcPoset, cap: usize, out: *mut *mut FcFlow) -> FcStatus {
    guard(|| {
        check_cap(cap)?;
        let poset = &borrow(p, "poset")?.0;
        put(out, Box::into_raw(Box::new(FcFlow(CombFlow::from_poset(poset, cap)))))
    })
}

/// # Safety
/// `f` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_flow_free(f: *mut FcFlow) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_flow_state_count(f: *const FcFlow, out: *mut usize) -> FcStatus {
    guard(|| put(out, borrow(f, "flow")?.0.state_count()))
}

/// Per-state branching (or, when `merging`, merging) spaces and their
/// homology, as JSON.
///
/// # Safety
/// `f` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_flow_branch_json(f: *const FcFlow, merging: bool, out: *mut *mut c_char) -> FcStatus {
    guard(|| {
        let dir = if merging { Direction::Plus } else { Direction::Minus };
        put_json(out, &branching_profile(&borrow(f, "flow")?.0, dir))
    })
}

/// The ball conditions and, for a ball, the branching space at the bottom.
///
/// # Safety
/// `f` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_flow_ball_check_json(f: *const FcFlow, out: *mut *mut c_char) -> FcStatus {
    guard(|| {
        let flow = &borrow(f, "flow")?.0;
        let ball = flow.ball_report();
        let bottom = if ball.is_ball { Some(resultat1_check(flow)?) } else { None };
        put_json(out, &serde_json::json!({ "ball": ball, "bottom": bottom }))
    })
}

/// Subdivides vertex `vertex` of the path space from `source` to `target`
/// by the ball `ball` and compares branching and merging homology.
///
/// # Safety
/// `x` and `ball` must be live handles, `source` and `target` nul-terminated
/// strings and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fc_check_invariance_json(
    x: *const FcFlow,
    source: *const c_char,
    target: *const c_char,
    vertex: usize,
    ball: *const FcFlow,
    budget: usize,
    out: *mut *mut c_char,
) -> FcStatus {
    guard(|| {
        let x = &borrow(x, "flow")?.0;
        let d = &borrow(ball, "ball")?.0;
        let (a, b) = (state(x, text(source, "source")?)?, state(x, text(target, "target")?)?);
        let sub = t_subdivide(x, (a, b, vertex), d, budget.max(1))?;
        put_json(out, &check_invariance(x, &sub.flow, &sub.map)?)
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a string from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The message of the last failed call on this thread, or null. Valid
/// until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn fc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}
