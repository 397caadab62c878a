//! C ABI over `ips-core`.
//!
//! Every fallible call returns an [`IpsStatus`]; on failure the message is
//! available from [`ips_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function. Matrices cross
//! the boundary as row-major arrays of interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ips_core::cli::{
    exit_code, sha256_hex, ChannelFile, CodeFile, ReportFile, EXIT_STRUCTURAL, EXIT_VALIDATION,
};
use ips_core::codes::{rng_from_seed, AnalysisMode};
use ips_core::spectral::{fixed_spaces, peripheral_spaces};
use ips_core::{
    analyze, is_correctable, is_noiseless, is_preserved, is_unitarily_noiseless, Channel,
    ComplexMatrix, Error, Tolerance, C64,
};

/// Status codes. Values 0-5 match the exit codes of the `ips` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpsStatus {
    Ok = 0,
    /// A verification ran and the predicate does not hold.
    Fail = 1,
    /// Malformed text input.
    Parse = 2,
    /// Dimension, contract, or parameter violation.
    Validation = 3,
    Structural = 4,
    Numeric = 5,
    /// A required pointer argument was null.
    NullArgument = 6,
    /// The library panicked; this is a bug.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpsMode {
    Noiseless = 0,
    UnitarilyNoiseless = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpsVerifyMode {
    Preserved = 0,
    Noiseless = 1,
    UnitarilyNoiseless = 2,
    Correctable = 3,
}

/// Numerical thresholds; see [`ips_tolerance_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IpsTolerance {
    pub eig_cluster: f64,
    pub rank_cutoff: f64,
    pub verify: f64,
}

/// Opaque channel handle.
pub struct IpsChannel {
    channel: Channel,
    label: Option<String>,
    digest: String,
}

/// Opaque analysis result.
pub struct IpsReport {
    report: ips_core::IpsReport,
    digest: String,
    label: Option<String>,
    seed: u64,
    tol: Tolerance,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: IpsStatus, msg: impl Into<String>) -> IpsStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> IpsStatus {
    let status = match exit_code(&e) {
        EXIT_VALIDATION => IpsStatus::Validation,
        EXIT_STRUCTURAL => IpsStatus::Structural,
        _ => IpsStatus::Numeric,
    };
    fail(status, e.to_string())
}

/// Run `f`, converting panics into [`IpsStatus::Panic`].
fn guard(f: impl FnOnce() -> IpsStatus) -> IpsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let what = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(IpsStatus::Panic, format!("panic: {what}"))
        }
    }
}

fn tolerance(tol: *const IpsTolerance) -> Result<Tolerance, IpsStatus> {
    if tol.is_null() {
        return Ok(Tolerance::default());
    }
    // SAFETY: caller passes either null or a valid pointer.
    let t = unsafe { *tol };
    Tolerance::new(t.eig_cluster, t.rank_cutoff, t.verify).map_err(from_error)
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, IpsStatus> {
    if s.is_null() {
        return Err(fail(IpsStatus::NullArgument, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(IpsStatus::Parse, "string argument is not UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s)
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ips_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread, or null.
///
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn ips_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ips_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn ips_tolerance_default() -> IpsTolerance {
    let t = Tolerance::default();
    IpsTolerance {
        eig_cluster: t.eig_cluster,
        rank_cutoff: t.rank_cutoff,
        verify: t.verify,
    }
}

/// Build a channel from `count` Kraus operators of size `dim x dim`.
///
/// `data` holds `count * dim * dim * 2` doubles: each operator row-major,
/// each entry as `(re, im)`.
///
/// # Safety
/// `data` must point to that many readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ips_channel_from_kraus(
    dim: usize,
    count: usize,
    data: *const f64,
    tol: *const IpsTolerance,
    out: *mut *mut IpsChannel,
) -> IpsStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            return fail(IpsStatus::NullArgument, "data and out must be non-null");
        }
        let Some(len) = dim
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(count))
            .and_then(|n| n.checked_mul(2))
        else {
            return fail(IpsStatus::Validation, "operator count overflows");
        };
        let values = std::slice::from_raw_parts(data, len);
        let ops: Vec<ComplexMatrix> = (0..count)
            .map(|k| {
                let block = &values[k * dim * dim * 2..(k + 1) * dim * dim * 2];
                ComplexMatrix::from_fn(dim, dim, |i, j| {
                    let at = 2 * (i * dim + j);
                    C64::new(block[at], block[at + 1])
                })
            })
            .collect();
        let t = match tolerance(tol) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Channel::from_kraus(ops, &t) {
            Ok(channel) => {
                let canonical = serde_json::to_vec(&ChannelFile::from_channel(&channel, None))
                    .expect("channel serializes");
                *out = Box::into_raw(Box::new(IpsChannel {
                    channel,
                    label: None,
                    digest: sha256_hex(&canonical),
                }));
                IpsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Parse a channel from the JSON format read by `ips analyze`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ips_channel_from_json(
    json: *const c_char,
    tol: *const IpsTolerance,
    out: *mut *mut IpsChannel,
) -> IpsStatus {
    guard(|| {
        if out.is_null() {
            return fail(IpsStatus::NullArgument, "out must be non-null");
        }
        let text = match c_str(json) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let file: ChannelFile = match serde_json::from_str(text) {
            Ok(f) => f,
            Err(e) => return fail(IpsStatus::Parse, format!("parse: {e}")),
        };
        let t = match tolerance(tol) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match file.to_channel(&t) {
            Ok(channel) => {
                *out = Box::into_raw(Box::new(IpsChannel {
                    channel,
                    label: file.label.clone(),
                    digest: sha256_hex(text.as_bytes()),
                }));
                IpsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `ch` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ips_channel_free(ch: *mut IpsChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `ch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ips_channel_dim(ch: *const IpsChannel) -> usize {
    ch.as_ref().map_or(0, |c| c.channel.dim())
}

/// Full structural analysis. `tol` may be null for defaults.
///
/// # Safety
/// `ch` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ips_analyze(
    ch: *const IpsChannel,
    mode: IpsMode,
    tol: *const IpsTolerance,
    seed: u64,
    out: *mut *mut IpsReport,
) -> IpsStatus {
    guard(|| {
        let (Some(ch), false) = (ch.as_ref(), out.is_null()) else {
            return fail(IpsStatus::NullArgument, "channel and out must be non-null");
        };
        let t = match tolerance(tol) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let mode = match mode {
            IpsMode::Noiseless => AnalysisMode::Noiseless,
            IpsMode::UnitarilyNoiseless => AnalysisMode::UnitarilyNoiseless,
        };
        match analyze(&ch.channel, mode, &t, seed) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(IpsReport {
                    report,
                    digest: ch.digest.clone(),
                    label: ch.label.clone(),
                    seed,
                    tol: t,
                }));
                IpsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `r` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ips_report_free(r: *mut IpsReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of blocks `M_d (x) 1_n` in the recovered structure.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ips_report_block_count(r: *const IpsReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.shape().len())
}

/// Block `index` as `(d, n)`.
///
/// # Safety
/// `r` must be a live handle; `d` and `n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ips_report_block(
    r: *const IpsReport,
    index: usize,
    d: *mut usize,
    n: *mut usize,
) -> IpsStatus {
    guard(|| {
        let Some(r) = r.as_ref() else {
            return fail(IpsStatus::NullArgument, "report is null");
        };
        if d.is_null() || n.is_null() {
            return fail(IpsStatus::NullArgument, "d and n must be non-null");
        }
        match r.report.shape().get(index) {
            Some(&(bd, bn)) => {
                *d = bd;
                *n = bn;
                IpsStatus::Ok
            }
            None => fail(
                IpsStatus::Validation,
                format!("block index {index} out of range"),
            ),
        }
    })
}

/// Rank of the joint support of the fixed states.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ips_report_support_rank(r: *const IpsReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.support_rank())
}

/// Dimension of the fixed (or peripheral) state space.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ips_report_fixed_dim(r: *const IpsReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.fixed_dim)
}

/// The report as the JSON document `ips analyze` writes. Free with
/// [`ips_string_free`]. Returns null on a null handle.
///
/// # Safety
/// `r` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ips_report_to_json(r: *const IpsReport) -> *mut c_char {
    let Some(r) = r.as_ref() else {
        set_error("report is null".into());
        return ptr::null_mut();
    };
    let file = ReportFile::from_report(&r.report, r.digest.clone(), r.label.clone(), r.seed, r.tol);
    into_c_string(serde_json::to_string_pretty(&file).expect("report serializes"))
}

/// Check a code (JSON as read by `ips verify`) against a channel.
///
/// Returns [`IpsStatus::Ok`] when the predicate holds and
/// [`IpsStatus::Fail`] when it does not; `worst_deviation` (nullable)
/// receives the largest sampled deviation.
///
/// # Safety
/// `ch` must be a live handle and `code_json` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ips_verify(
    ch: *const IpsChannel,
    code_json: *const c_char,
    mode: IpsVerifyMode,
    tol: *const IpsTolerance,
    seed: u64,
    trials: usize,
    worst_deviation: *mut f64,
) -> IpsStatus {
    guard(|| {
        let Some(ch) = ch.as_ref() else {
            return fail(IpsStatus::NullArgument, "channel is null");
        };
        let text = match c_str(code_json) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let file: CodeFile = match serde_json::from_str(text) {
            Ok(f) => f,
            Err(e) => return fail(IpsStatus::Parse, format!("parse: {e}")),
        };
        let t = match tolerance(tol) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let e = &ch.channel;
        let mut rng = rng_from_seed(seed);
        let report = file.to_code(&t).and_then(|code| match mode {
            IpsVerifyMode::Preserved => is_preserved(e, &code, &t, trials, &mut rng),
            IpsVerifyMode::Noiseless => {
                let fs = fixed_spaces(e, &t)?;
                is_noiseless(e, &code, &fs, &t, trials, &mut rng)
            }
            IpsVerifyMode::UnitarilyNoiseless => {
                let ps = peripheral_spaces(e, &t)?;
                is_unitarily_noiseless(e, &code, &ps, &t, trials, &mut rng)
            }
            IpsVerifyMode::Correctable => {
                is_correctable(e, &code, &t, trials, &mut rng).map(|(r, _)| r)
            }
        });
        match report {
            Ok(r) => {
                if !worst_deviation.is_null() {
                    *worst_deviation = r.worst_pair_deviation;
                }
                if r.passed() {
                    IpsStatus::Ok
                } else {
                    fail(
                        IpsStatus::Fail,
                        format!(
                            "verification failed: worst deviation {:.3e}",
                            r.worst_pair_deviation
                        ),
                    )
                }
            }
            Err(e) => from_error(e),
        }
    })
}
