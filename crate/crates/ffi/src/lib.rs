//! C ABI over the `spikefilt` core.
//!
//! Objects are opaque handles created by `*_new` functions and released with
//! the matching `*_free`. Every fallible call returns an [`SfStatus`]; on
//! failure the message is kept per thread and can be read with
//! [`sf_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use spikefilt::kernels::{current_kernel, filt_window, psp_kernel, reset_kernel};
use spikefilt::metrics::vrd;
use spikefilt::neuron::simulate_spikes;
use spikefilt::{Error, InputPattern, NeuronParams, Rule, SpikeTrain, WeightVector};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Failed = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfRule {
    Inst = 0,
    Filt = 1,
}

/// Neuron and kernel parameters.
pub struct SfParams(NeuronParams);
/// Input spike pattern over a set of synapses.
pub struct SfPattern(InputPattern);
/// Sorted spike times in ms.
pub struct SfSpikeTrain(SpikeTrain);

/// Kernel values at one lag.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SfKernels {
    pub alpha: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub lambda: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SfStatus {
    match e {
        Error::InvalidParams(_)
        | Error::InvalidSpikeTrain(_)
        | Error::LengthMismatch { .. }
        | Error::InvalidConfig(_) => SfStatus::InvalidArgument,
        _ => SfStatus::Failed,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (SfStatus, String)>) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SfStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SfStatus::Panic
        }
    }
}

fn lib<T>(r: spikefilt::Result<T>) -> Result<T, (SfStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SfStatus, String) {
    (SfStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SfStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn floats<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], (SfStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, n))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (SfStatus, String)> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length excluding the NUL.
/// Returns 0 when no error has been recorded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sf_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Default parameters.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_params_new_default(out: *mut *mut SfParams) -> SfStatus {
    guard(|| put(out, SfParams(NeuronParams::default())))
}

/// Parameters from explicit values (ms, mV, 1/ms).
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn sf_params_new(
    eps0: f64,
    tau_m: f64,
    tau_s: f64,
    theta: f64,
    u_reset: f64,
    tau_q: f64,
    rho0: f64,
    delta_u: f64,
    out: *mut *mut SfParams,
) -> SfStatus {
    guard(|| {
        let p = lib(NeuronParams::builder()
            .eps0(eps0)
            .tau_m(tau_m)
            .tau_s(tau_s)
            .theta(theta)
            .u_reset(u_reset)
            .tau_q(tau_q)
            .rho0(rho0)
            .delta_u(delta_u)
            .build())?;
        put(out, SfParams(p))
    })
}

/// # Safety
/// `p` must be null or a handle from `sf_params_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_params_free(p: *mut SfParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Current, PSP, reset and FILT window kernels at lag `s` ms.
///
/// # Safety
/// `params` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sf_kernels(params: *const SfParams, s: f64, out: *mut SfKernels) -> SfStatus {
    guard(|| {
        let p = &borrow(params, "params")?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = SfKernels {
            alpha: current_kernel(s, p),
            epsilon: psp_kernel(s, p),
            kappa: reset_kernel(s, p),
            lambda: filt_window(s, p),
        };
        Ok(())
    })
}

/// Spike train from `n` strictly increasing, finite, non-negative times.
///
/// # Safety
/// `times` must be valid for `n` reads and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sf_spike_train_new(times: *const f64, n: usize, out: *mut *mut SfSpikeTrain) -> SfStatus {
    guard(|| {
        let t = floats(times, n, "times")?;
        let train = lib(SpikeTrain::new(t.to_vec()))?;
        put(out, SfSpikeTrain(train))
    })
}

/// Number of spikes; 0 for a null handle.
///
/// # Safety
/// `train` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_spike_train_len(train: *const SfSpikeTrain) -> usize {
    train.as_ref().map_or(0, |t| t.0.len())
}

/// Copies the spike times into `buf` of capacity `cap`; `written` receives
/// the spike count. Fails with `BufferTooSmall` when `cap` is short.
///
/// # Safety
/// `train` must be a live handle, `buf` valid for `cap` writes and `written`
/// valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sf_spike_train_times(
    train: *const SfSpikeTrain,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> SfStatus {
    guard(|| {
        let t = borrow(train, "train")?.0.times();
        let written = written.as_mut().ok_or_else(|| null("written"))?;
        *written = t.len();
        if cap < t.len() {
            return Err((SfStatus::BufferTooSmall, format!("need room for {} spikes, got {cap}", t.len())));
        }
        if !t.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(t.as_ptr(), buf, t.len());
        }
        Ok(())
    })
}

/// # Safety
/// `train` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_spike_train_free(train: *mut SfSpikeTrain) {
    if !train.is_null() {
        drop(Box::from_raw(train));
    }
}

/// Pattern with exactly one spike per input: input `j` fires at `times[j]`.
///
/// # Safety
/// `times` must be valid for `n_inputs` reads and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sf_pattern_new_single(
    times: *const f64,
    n_inputs: usize,
    duration: f64,
    out: *mut *mut SfPattern,
) -> SfStatus {
    guard(|| {
        let t = floats(times, n_inputs, "times")?;
        put(out, SfPattern(lib(InputPattern::single_spikes(t, duration))?))
    })
}

/// General pattern: input `j` owns the next `counts[j]` entries of `times`.
///
/// # Safety
/// `counts` must be valid for `n_inputs` reads, `times` for the sum of the
/// counts, and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sf_pattern_new(
    times: *const f64,
    counts: *const usize,
    n_inputs: usize,
    duration: f64,
    out: *mut *mut SfPattern,
) -> SfStatus {
    guard(|| {
        if n_inputs > 0 && counts.is_null() {
            return Err(null("counts"));
        }
        let counts = if n_inputs == 0 { &[][..] } else { slice::from_raw_parts(counts, n_inputs) };
        let total = counts.iter().try_fold(0usize, |a, &c| a.checked_add(c));
        let total = total.ok_or_else(|| (SfStatus::InvalidArgument, "spike counts overflow".to_string()))?;
        let all = floats(times, total, "times")?;
        let mut trains = Vec::with_capacity(n_inputs);
        let mut at = 0;
        for &c in counts {
            trains.push(lib(SpikeTrain::new(all[at..at + c].to_vec()))?);
            at += c;
        }
        put(out, SfPattern(lib(InputPattern::new(trains, duration))?))
    })
}

/// Number of inputs; 0 for a null handle.
///
/// # Safety
/// `pattern` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_pattern_n_inputs(pattern: *const SfPattern) -> usize {
    pattern.as_ref().map_or(0, |p| p.0.n_inputs())
}

/// # Safety
/// `pattern` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_pattern_free(pattern: *mut SfPattern) {
    if !pattern.is_null() {
        drop(Box::from_raw(pattern));
    }
}

/// Van Rossum distance between two trains.
///
/// # Safety
/// `a` and `b` must be live handles and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sf_vrd(a: *const SfSpikeTrain, b: *const SfSpikeTrain, tau_q: f64, out: *mut f64) -> SfStatus {
    guard(|| {
        let (a, b) = (&borrow(a, "a")?.0, &borrow(b, "b")?.0);
        if !(tau_q > 0.0 && tau_q.is_finite()) {
            return Err((SfStatus::InvalidArgument, format!("tau_q must be positive, got {tau_q}")));
        }
        *out.as_mut().ok_or_else(|| null("out"))? = vrd(a, b, tau_q);
        Ok(())
    })
}

/// Simulates one trial with step `dt` and returns the output spikes.
///
/// # Safety
/// `pattern` and `params` must be live handles, `weights` valid for
/// `n_weights` reads and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn sf_simulate(
    pattern: *const SfPattern,
    weights: *const f64,
    n_weights: usize,
    params: *const SfParams,
    dt: f64,
    out: *mut *mut SfSpikeTrain,
) -> SfStatus {
    guard(|| {
        let pat = &borrow(pattern, "pattern")?.0;
        let p = &borrow(params, "params")?.0;
        let w = WeightVector(floats(weights, n_weights, "weights")?.to_vec());
        put(out, SfSpikeTrain(lib(simulate_spikes(pat, &w, p, dt))?))
    })
}

/// Per-trial weight change of `rule` into `dw` (one entry per input).
///
/// # Safety
/// All handles must be live and `dw` valid for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn sf_update(
    rule: SfRule,
    pattern: *const SfPattern,
    actual: *const SfSpikeTrain,
    target: *const SfSpikeTrain,
    eta: f64,
    params: *const SfParams,
    dw: *mut f64,
    n: usize,
) -> SfStatus {
    guard(|| {
        let pat = &borrow(pattern, "pattern")?.0;
        let actual = &borrow(actual, "actual")?.0;
        let target = &borrow(target, "target")?.0;
        let p = &borrow(params, "params")?.0;
        if n != pat.n_inputs() {
            return Err((SfStatus::BufferTooSmall, format!("dw holds {n} entries, pattern has {} inputs", pat.n_inputs())));
        }
        if dw.is_null() && n > 0 {
            return Err(null("dw"));
        }
        let rule = match rule {
            SfRule::Inst => Rule::Inst,
            SfRule::Filt => Rule::Filt,
        };
        let update = rule.update(pat, actual, target, eta, p);
        if n > 0 {
            ptr::copy_nonoverlapping(update.dw.as_ptr(), dw, n);
        }
        Ok(())
    })
}
