// SPDX-License-Identifier: Apache-2.0

//! C ABI over the `qdarwin` core.
//!
//! Every entry point returns a [`QdStatus`]. On failure a message is kept
//! per thread and can be read with [`qd_last_error`]. Panics are caught at
//! the boundary and reported as `QD_STATUS_PANIC`. Handles are opaque and
//! must be released with [`qd_propagator_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qdarwin::branches::BranchState;
use qdarwin::model::{propagator_for, ModelConfig, Propagator};
use qdarwin::nonmarkov::{nm_degree, sample_pairs};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Model parameters. A negative `gamma_bar` means "same as `gamma`".
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QdParams {
    pub n_env: usize,
    pub omega0: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub gamma: f64,
    pub gamma_bar: f64,
    pub alpha0_re: f64,
    pub alpha0_im: f64,
    pub branch_a_re: f64,
    pub branch_a_im: f64,
    pub branch_b_re: f64,
    pub branch_b_im: f64,
}

/// Diagonalized model together with its parameters.
pub struct QdPropagator {
    config: ModelConfig,
    inner: Propagator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Fallible = Result<(), (QdStatus, String)>;

fn status_of(e: &qdarwin::Error) -> QdStatus {
    use qdarwin::Error as E;
    match e {
        E::Config(_) => QdStatus::Config,
        E::InvalidArgument(_) | E::Io { .. } => QdStatus::InvalidArgument,
        E::Eigensolver(_) | E::Numerical(_) | E::Truncation { .. } => QdStatus::Numerical,
    }
}

fn core(e: qdarwin::Error) -> (QdStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (QdStatus, String) {
    (QdStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Fallible) -> QdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            QdStatus::Panic
        }
    }
}

unsafe fn handle<'a>(p: *const QdPropagator) -> Result<&'a QdPropagator, (QdStatus, String)> {
    p.as_ref().ok_or_else(|| null("propagator"))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qd_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Fills `out` with the default model parameters.
///
/// # Safety
/// `out` must be null or point to writable memory for one `QdParams`.
#[no_mangle]
pub unsafe extern "C" fn qd_params_default(out: *mut QdParams) -> QdStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = ModelConfig::default();
        *out = QdParams {
            n_env: d.n_env,
            omega0: d.omega0,
            omega_min: d.omega_min,
            omega_max: d.omega_max,
            gamma: d.gamma,
            gamma_bar: -1.0,
            alpha0_re: d.alpha0.re,
            alpha0_im: d.alpha0.im,
            branch_a_re: d.branch_a.re,
            branch_a_im: d.branch_a.im,
            branch_b_re: d.branch_b.re,
            branch_b_im: d.branch_b.im,
        };
        Ok(())
    })
}

/// Builds and diagonalizes the model described by `params`.
///
/// # Safety
/// `params` must be null or valid for reads; `out` must be null or valid
/// for one pointer write. On success `*out` owns a new handle.
#[no_mangle]
pub unsafe extern "C" fn qd_propagator_new(
    params: *const QdParams,
    out: *mut *mut QdPropagator,
) -> QdStatus {
    guard(|| {
        let params = params.as_ref().ok_or_else(|| null("params"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = ptr::null_mut();
        let mut config = ModelConfig {
            n_env: params.n_env,
            omega0: params.omega0,
            omega_min: params.omega_min,
            omega_max: params.omega_max,
            gamma: params.gamma,
            gamma_bar: (params.gamma_bar >= 0.0).then_some(params.gamma_bar),
            alpha0: Complex64::new(params.alpha0_re, params.alpha0_im),
            branch_a: Complex64::new(params.branch_a_re, params.branch_a_im),
            branch_b: Complex64::new(params.branch_b_re, params.branch_b_im),
            ..ModelConfig::default()
        };
        // The default grid depends on the rate; keep a two-point grid that
        // validates for any positive rate.
        config.time_grid = vec![0.0, 1.0];
        let inner = propagator_for(&config).map_err(core)?;
        *out = Box::into_raw(Box::new(QdPropagator { config, inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must be null or a handle from [`qd_propagator_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qd_propagator_free(p: *mut QdPropagator) {
    if !p.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(p))));
    }
}

/// Number of bath oscillators, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qd_propagator_n_env(p: *const QdPropagator) -> usize {
    p.as_ref().map_or(0, |h| h.inner.n_env())
}

/// Continuum decay rate `4 pi gamma^2 N / bandwidth` of the model.
///
/// # Safety
/// `p` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qd_propagator_decay_rate(
    p: *const QdPropagator,
    out: *mut f64,
) -> QdStatus {
    guard(|| {
        let h = handle(p)?;
        *out.as_mut().ok_or_else(|| null("out"))? = h.config.decay_rate();
        Ok(())
    })
}

/// Coherent amplitudes at time `t`, interleaved as `re, im`: the system
/// first, then every bath mode. `out` must hold `2 * (n_env + 1)` doubles.
///
/// # Safety
/// `p` must be null or a live handle; `out` must be null or writable for
/// `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qd_propagator_evolve(
    p: *const QdPropagator,
    t: f64,
    out: *mut f64,
    len: usize,
) -> QdStatus {
    guard(|| {
        let h = handle(p)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !t.is_finite() {
            return Err((QdStatus::InvalidArgument, format!("time {t} is not finite")));
        }
        let need = 2 * (h.inner.n_env() + 1);
        if len < need {
            return Err((
                QdStatus::BufferTooSmall,
                format!("buffer holds {len} doubles, need {need}"),
            ));
        }
        let amps = h.inner.evolve(h.config.alpha0, t);
        let out = std::slice::from_raw_parts_mut(out, need);
        for j in 0..amps.n_sites() {
            let z = amps.site(j);
            out[2 * j] = z.re;
            out[2 * j + 1] = z.im;
        }
        Ok(())
    })
}

/// System and bath excitation numbers at time `t`.
///
/// # Safety
/// `p` must be null or a live handle; `system` and `env` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qd_excitations(
    p: *const QdPropagator,
    t: f64,
    system: *mut f64,
    env: *mut f64,
) -> QdStatus {
    guard(|| {
        let h = handle(p)?;
        let system = system.as_mut().ok_or_else(|| null("system"))?;
        let env = env.as_mut().ok_or_else(|| null("env"))?;
        let e = h.inner.evolve(h.config.alpha0, t).excitation_profile();
        *system = e.system;
        *env = e.env_total;
        Ok(())
    })
}

unsafe fn branch_state(h: &QdPropagator, t: f64) -> Result<BranchState, (QdStatus, String)> {
    let c = &h.config;
    BranchState::new(c.branch_a, c.branch_b, c.alpha0, h.inner.evolve(c.alpha0, t)).map_err(core)
}

/// Von Neumann entropy (nats) of the system at time `t`.
///
/// # Safety
/// `p` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qd_system_entropy(p: *const QdPropagator, t: f64, out: *mut f64) -> QdStatus {
    guard(|| {
        let h = handle(p)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = branch_state(h, t)?.system_entropy().map_err(core)?;
        Ok(())
    })
}

/// Mutual information `I(S:F)` at time `t` for the bath modes listed in
/// `fragment` (1-based, distinct).
///
/// # Safety
/// `p` must be null or a live handle; `fragment` must be readable for
/// `len` entries; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qd_mutual_information(
    p: *const QdPropagator,
    t: f64,
    fragment: *const usize,
    len: usize,
    out: *mut f64,
) -> QdStatus {
    guard(|| {
        let h = handle(p)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let frag: &[usize] = if len == 0 {
            &[]
        } else if fragment.is_null() {
            return Err(null("fragment"));
        } else {
            std::slice::from_raw_parts(fragment, len)
        };
        *out = branch_state(h, t)?.mutual_information(frag).map_err(core)?;
        Ok(())
    })
}

/// Non-Markovianity degree on the time grid `times` (ascending), maximized
/// over pairs formed from `samples` normal initial amplitudes drawn with
/// `seed`.
///
/// # Safety
/// `p` must be null or a live handle; `times` must be readable for
/// `n_times` entries; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qd_nm_degree(
    p: *const QdPropagator,
    times: *const f64,
    n_times: usize,
    samples: usize,
    seed: u64,
    out: *mut f64,
) -> QdStatus {
    guard(|| {
        let h = handle(p)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if times.is_null() {
            return Err(null("times"));
        }
        let times = std::slice::from_raw_parts(times, n_times);
        let pairs = sample_pairs(samples, seed, h.config.pair_variance).map_err(core)?;
        *out = nm_degree(&h.inner, &pairs, times).map_err(core)?;
        Ok(())
    })
}
