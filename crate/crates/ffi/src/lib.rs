//! C ABI for sphere-kernels.
//!
//! Every fallible function returns an [`SkStatus`]; on failure the message
//! is available from [`sk_last_error_message`] on the same thread. Handles
//! are opaque and released with their `_free` function. Strings returned by
//! the library are released with [`sk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sphere_kernels::cli::parse_grid;
use sphere_kernels::groups::{GroupElement, GroupModel};
use sphere_kernels::pd_check::{membership_test, GroupSampler};
use sphere_kernels::schoenberg::{self, SchoenbergSequence};
use sphere_kernels::special_functions;
use sphere_kernels::{table, Error, KernelSpecFile};

/// Result codes; the numeric values match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Numerical = 3,
    MembershipFail = 4,
    Panic = 5,
}

/// A parsed and validated kernel spec with its group model.
pub struct SkKernel {
    file: KernelSpecFile,
}

/// Extracted coefficient functions on a grid of group elements.
pub struct SkSequence {
    seq: SchoenbergSequence,
    model: GroupModel,
    grid: Vec<GroupElement>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

struct Failure(SkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_numerical() { SkStatus::Numerical } else { SkStatus::InvalidInput };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SkStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<SkStatus, Failure>) -> SkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SkStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(SkStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn into_c_string(text: String) -> Result<*mut c_char, Failure> {
    CString::new(text)
        .map(CString::into_raw)
        .map_err(|_| Failure(SkStatus::Panic, "output contains a NUL byte".into()))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a kernel spec document (`{"group": ..., "kernel": ...}`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sk_kernel_from_json(json: *const c_char, out: *mut *mut SkKernel) -> SkStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let file = KernelSpecFile::from_json_str(read_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(SkKernel { file }));
        Ok(SkStatus::Ok)
    })
}

/// # Safety
/// `kernel` must come from [`sk_kernel_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sk_kernel_free(kernel: *mut SkKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// `f(x, u)`, with `u` given as JSON (`2`, `0.5`, `[1, 0]`).
///
/// # Safety
/// Pointers must be valid; `u_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sk_kernel_eval(
    kernel: *const SkKernel,
    x: f64,
    u_json: *const c_char,
    re: *mut f64,
    im: *mut f64,
) -> SkStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        let (re, im) = (out_ref(re, "re")?, out_ref(im, "im")?);
        let u = k.file.group.parse_element(read_str(u_json, "u_json")?)?;
        let v = k.file.kernel.eval(&k.file.group, x, &u)?;
        (*re, *im) = (v.re, v.im);
        Ok(SkStatus::Ok)
    })
}

/// Gegenbauer polynomial `C_n^lambda(x)`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sk_gegenbauer(lambda: f64, n: usize, x: f64, out: *mut f64) -> SkStatus {
    guard(|| {
        *out_ref(out, "out")? = special_functions::gegenbauer_eval(lambda, n, x)?;
        Ok(SkStatus::Ok)
    })
}

/// Normalized ultraspherical polynomial `c_n(d, x)`, with `c_n(d, 1) = 1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sk_ultraspherical(d: usize, n: usize, x: f64, out: *mut f64) -> SkStatus {
    guard(|| {
        let basis = special_functions::UltrasphericalBasis::new(d, n)?;
        *out_ref(out, "out")? = special_functions::ultraspherical_eval(&basis, n, x)?;
        Ok(SkStatus::Ok)
    })
}

/// Dimension `N_n(d)` of the degree-`n` spherical harmonics on `S^d`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sk_harmonic_dim(d: usize, n: usize, out: *mut u64) -> SkStatus {
    guard(|| {
        let value = special_functions::harmonic_dim(d, n)?;
        *out_ref(out, "out")? = u64::try_from(value)
            .map_err(|_| Failure(SkStatus::InvalidInput, format!("N_{n}({d}) does not fit in 64 bits")))?;
        Ok(SkStatus::Ok)
    })
}

/// Surface area of `S^d`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sk_sphere_surface(d: usize, out: *mut f64) -> SkStatus {
    guard(|| {
        *out_ref(out, "out")? = special_functions::sphere_surface(d);
        Ok(SkStatus::Ok)
    })
}

/// Extracts `phi_{n,d}` for `n <= n_max` on a grid (`"real:-2:2:0.5"`,
/// `"int:-3:3"`, `"cyclic"`, `"json:[...]"` or `"identity"`).
///
/// # Safety
/// Pointers must be valid; `grid` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sk_extract(
    kernel: *const SkKernel,
    d: usize,
    n_max: usize,
    grid: *const c_char,
    out: *mut *mut SkSequence,
) -> SkStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        let out = out_ref(out, "out")?;
        let model = k.file.group;
        let grid = parse_grid(&model, read_str(grid, "grid")?)?;
        let seq = schoenberg::extract(&k.file.kernel, &model, d, n_max, &grid, None)?;
        *out = Box::into_raw(Box::new(SkSequence { seq, model, grid }));
        Ok(SkStatus::Ok)
    })
}

/// # Safety
/// `seq` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sk_sequence_free(seq: *mut SkSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Number of retained degrees, `n_max + 1`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_sequence_len(seq: *const SkSequence, out: *mut usize) -> SkStatus {
    guard(|| {
        let s = seq.as_ref().ok_or_else(|| null("seq"))?;
        *out_ref(out, "out")? = s.seq.coefficients.len();
        Ok(SkStatus::Ok)
    })
}

/// `phi_{n,d}(e)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_sequence_identity_value(
    seq: *const SkSequence,
    n: usize,
    re: *mut f64,
    im: *mut f64,
) -> SkStatus {
    guard(|| {
        let s = seq.as_ref().ok_or_else(|| null("seq"))?;
        let (re, im) = (out_ref(re, "re")?, out_ref(im, "im")?);
        let c = s.seq.coefficients.get(n).ok_or_else(|| {
            Failure(SkStatus::InvalidInput, format!("degree {n} exceeds n_max = {}", s.seq.n_max()))
        })?;
        let v = c.at_identity(&s.model);
        (*re, *im) = (v.re, v.im);
        Ok(SkStatus::Ok)
    })
}

/// Truncated expansion at `(x, u)`; `u` must lie on the extraction grid.
///
/// # Safety
/// Pointers must be valid; `u_json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sk_sequence_synthesize(
    seq: *const SkSequence,
    x: f64,
    u_json: *const c_char,
    re: *mut f64,
    im: *mut f64,
) -> SkStatus {
    guard(|| {
        let s = seq.as_ref().ok_or_else(|| null("seq"))?;
        let (re, im) = (out_ref(re, "re")?, out_ref(im, "im")?);
        let u = s.model.parse_element(read_str(u_json, "u_json")?)?;
        let v = s.seq.synthesize(&s.model, x, &u)?.value;
        (*re, *im) = (v.re, v.im);
        Ok(SkStatus::Ok)
    })
}

/// Coefficients at dimension `d + 2`. Returns `MembershipFail` (with the
/// new handle still written) when a negative identity value certifies that
/// the kernel is not positive definite on the higher sphere.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_sequence_step_up(seq: *const SkSequence, out: *mut *mut SkSequence) -> SkStatus {
    guard(|| {
        let s = seq.as_ref().ok_or_else(|| null("seq"))?;
        let out = out_ref(out, "out")?;
        let up = schoenberg::step_up(&s.seq, &s.model)?;
        let status = if up.is_nonmember() { SkStatus::MembershipFail } else { SkStatus::Ok };
        *out = Box::into_raw(Box::new(SkSequence { seq: up, model: s.model, grid: s.grid.clone() }));
        Ok(status)
    })
}

/// The sequence as a CSV table; release with [`sk_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_sequence_to_csv(seq: *const SkSequence, out: *mut *mut c_char) -> SkStatus {
    guard(|| {
        let s = seq.as_ref().ok_or_else(|| null("seq"))?;
        let out = out_ref(out, "out")?;
        *out = into_c_string(table::write_sequence(&s.seq, &s.model, &s.grid)?)?;
        Ok(SkStatus::Ok)
    })
}

/// Empirical positive definiteness test on `S^d x G`. Writes the report as
/// JSON to `report_json` (release with [`sk_string_free`]) and returns
/// `MembershipFail` when the verdict is fail.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_check(
    kernel: *const SkKernel,
    d: usize,
    trials: usize,
    n_points: usize,
    seed: u64,
    report_json: *mut *mut c_char,
) -> SkStatus {
    guard(|| {
        let k = kernel.as_ref().ok_or_else(|| null("kernel"))?;
        let out = out_ref(report_json, "report_json")?;
        let report = membership_test(&k.file.kernel, &k.file.group, d, GroupSampler::ModelDefault, trials, n_points, seed)?;
        let text = serde_json::to_string(&report).map_err(|e| Failure(SkStatus::Panic, e.to_string()))?;
        *out = into_c_string(text)?;
        Ok(if report.verdict.passed() { SkStatus::Ok } else { SkStatus::MembershipFail })
    })
}
