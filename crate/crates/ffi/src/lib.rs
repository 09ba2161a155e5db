//! C ABI over the `roughness` crate.
//!
//! Paths cross the boundary as opaque `RoughPath` handles created by one of
//! the constructors and released with `rough_path_free`. Every fallible
//! function returns a `RoughStatus`; on failure a description is available
//! from `rough_last_error_message` until the next failing call on the same
//! thread. Panics are caught and reported as `ROUGH_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use roughness::estimator::{beta_coeffs, r_hat, r_seq, SeqEstimatorConfig};
use roughness::experiments::{ModelSpec, ProcessSpec};
use roughness::processes::{DyadicPath, TransformG};
use roughness::sim::{fgn_autocov, simulate_fbm, BackendKind, SimBackend};
use roughness::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoughStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Degenerate = 3,
    Numerical = 4,
    InsufficientResolution = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoughBackend {
    Circulant = 0,
    Cholesky = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoughModel {
    Fou = 0,
    DriftedFbm = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoughTransform {
    Identity = 0,
    ExpTwoT = 1,
    Square = 2,
    NonMonotone = 3,
}

/// Parameters of a simulated observation `Y = ∫ g(X) ds`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RoughProcessParams {
    pub model: RoughModel,
    pub hurst: f64,
    pub x0: f64,
    /// fOU mean-reversion speed (ignored for drifted fBm).
    pub rho: f64,
    /// fOU mean-reversion level (ignored for drifted fBm).
    pub mu: f64,
    /// Constant drift (ignored for fOU).
    pub drift: f64,
    pub transform: RoughTransform,
    pub target_level: u32,
    pub oversample_q: u32,
    pub backend: RoughBackend,
}

/// Sequential scale estimate at one level.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RoughEstimate {
    pub n: u32,
    pub r_hat: f64,
    pub r_seq: f64,
    pub eta_seq: f64,
    pub lambda_star: f64,
}

/// Opaque dyadic path handle.
pub struct RoughPath {
    inner: DyadicPath,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RoughStatus {
    match err {
        Error::Degenerate { .. } => RoughStatus::Degenerate,
        Error::InsufficientResolution { .. } | Error::InsufficientLevels { .. } => RoughStatus::InsufficientResolution,
        Error::NegativeEigenvalue { .. } | Error::NotPositiveDefinite { .. } | Error::Inconsistent { .. } => {
            RoughStatus::Numerical
        }
        _ => RoughStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (RoughStatus, String)>) -> RoughStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RoughStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside roughness".into());
            RoughStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (RoughStatus, String)>;
}

impl<T> IntoFfi<T> for Result<T, Error> {
    fn ffi(self) -> Result<T, (RoughStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (RoughStatus, String) {
    (RoughStatus::NullPointer, format!("{what} is null"))
}

unsafe fn out_handle(out: *mut *mut RoughPath, path: DyadicPath) {
    unsafe { *out = Box::into_raw(Box::new(RoughPath { inner: path })) };
}

unsafe fn config_from(m: usize, alphas: *const f64) -> Result<SeqEstimatorConfig, (RoughStatus, String)> {
    if alphas.is_null() {
        return Err(null("alphas"));
    }
    let a = unsafe { slice::from_raw_parts(alphas, m + 1) }.to_vec();
    SeqEstimatorConfig::new(m, a).ffi()
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rough_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `len` values (`len` must be `2^L + 1`) into a new path handle.
#[no_mangle]
pub unsafe extern "C" fn rough_path_from_values(
    values: *const f64,
    len: usize,
    out: *mut *mut RoughPath,
) -> RoughStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let v = unsafe { slice::from_raw_parts(values, len) }.to_vec();
        let path = DyadicPath::from_values(v, "ffi").ffi()?;
        unsafe { out_handle(out, path) };
        Ok(())
    })
}

/// Releases a handle; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn rough_path_free(path: *mut RoughPath) {
    if !path.is_null() {
        drop(unsafe { Box::from_raw(path) });
    }
}

/// Number of values (`2^level + 1`), or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn rough_path_len(path: *const RoughPath) -> usize {
    unsafe { path.as_ref() }.map_or(0, |p| p.inner.values().len())
}

#[no_mangle]
pub unsafe extern "C" fn rough_path_level(path: *const RoughPath, out: *mut u32) -> RoughStatus {
    guard(|| {
        let p = unsafe { path.as_ref() }.ok_or_else(|| null("path"))?;
        let o = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *o = p.inner.level();
        Ok(())
    })
}

/// Copies the path into `buf`, which must hold exactly `rough_path_len` values.
#[no_mangle]
pub unsafe extern "C" fn rough_path_copy_values(path: *const RoughPath, buf: *mut f64, len: usize) -> RoughStatus {
    guard(|| {
        let p = unsafe { path.as_ref() }.ok_or_else(|| null("path"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let src = p.inner.values();
        if len != src.len() {
            return Err((RoughStatus::InvalidArgument, format!("buffer holds {len} values, path has {}", src.len())));
        }
        unsafe { slice::from_raw_parts_mut(buf, len) }.copy_from_slice(src);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rough_fgn_autocov(k: u64, hurst: f64, out: *mut f64) -> RoughStatus {
    guard(|| {
        let o = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *o = fgn_autocov(k, hurst).ffi()?;
        Ok(())
    })
}

fn backend(b: RoughBackend) -> SimBackend {
    match b {
        RoughBackend::Circulant => BackendKind::CirculantEmbedding.into(),
        RoughBackend::Cholesky => BackendKind::Cholesky.into(),
    }
}

/// fBm on the grid of `level`, as a path handle.
#[no_mangle]
pub unsafe extern "C" fn rough_simulate_fbm(
    level: u32,
    hurst: f64,
    seed: u64,
    backend_kind: RoughBackend,
    out: *mut *mut RoughPath,
) -> RoughStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let fbm = simulate_fbm(level, hurst, seed, backend(backend_kind)).ffi()?;
        let path = DyadicPath::new(level, fbm.into_values(), "fbm").ffi()?;
        unsafe { out_handle(out, path) };
        Ok(())
    })
}

/// Simulates `X` and returns `Y = ∫ g(X) ds` on the grid of `target_level`.
#[no_mangle]
pub unsafe extern "C" fn rough_simulate_observed(
    params: *const RoughProcessParams,
    seed: u64,
    out: *mut *mut RoughPath,
) -> RoughStatus {
    guard(|| {
        let p = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let model = match p.model {
            RoughModel::Fou => ModelSpec::Fou { x0: p.x0, rho: p.rho, mu: p.mu },
            RoughModel::DriftedFbm => ModelSpec::DriftedFbm { x0: p.x0, drift: p.drift },
        };
        let transform = match p.transform {
            RoughTransform::Identity => TransformG::Identity,
            RoughTransform::ExpTwoT => TransformG::ExpTwoT,
            RoughTransform::Square => TransformG::Square,
            RoughTransform::NonMonotone => TransformG::PaperNonMonotone,
        };
        let spec = ProcessSpec {
            model,
            hurst: p.hurst,
            transform,
            target_level: p.target_level,
            oversample_q: p.oversample_q,
            backend: backend(p.backend),
        };
        let ip = spec.simulate(seed).ffi()?;
        unsafe { out_handle(out, ip.y) };
        Ok(())
    })
}

/// Raw estimate at level `n`.
#[no_mangle]
pub unsafe extern "C" fn rough_r_hat(path: *const RoughPath, n: u32, out: *mut f64) -> RoughStatus {
    guard(|| {
        let p = unsafe { path.as_ref() }.ok_or_else(|| null("path"))?;
        let o = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *o = r_hat(&p.inner, n).ffi()?;
        Ok(())
    })
}

/// Sequential scale estimate at level `n`; `alphas` points to `m + 1` weights.
#[no_mangle]
pub unsafe extern "C" fn rough_r_seq(
    path: *const RoughPath,
    n: u32,
    m: usize,
    alphas: *const f64,
    out: *mut RoughEstimate,
) -> RoughStatus {
    guard(|| {
        let p = unsafe { path.as_ref() }.ok_or_else(|| null("path"))?;
        let o = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let cfg = unsafe { config_from(m, alphas) }?;
        let rep = r_seq(&p.inner, n, &cfg).ffi()?;
        *o =
            RoughEstimate { n, r_hat: rep.r_hat, r_seq: rep.r_seq, eta_seq: rep.eta_seq, lambda_star: rep.lambda_star };
        Ok(())
    })
}

/// Writes `β_{n,k}` for `k = n − m − 1, …, n` into `out` (`m + 2` values).
#[no_mangle]
pub unsafe extern "C" fn rough_beta_coeffs(
    n: u32,
    m: usize,
    alphas: *const f64,
    out: *mut f64,
    out_len: usize,
) -> RoughStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = unsafe { config_from(m, alphas) }?;
        let beta = beta_coeffs(n, &cfg).ffi()?;
        if out_len != beta.weights.len() {
            return Err((
                RoughStatus::InvalidArgument,
                format!("output holds {out_len} values, expected {}", beta.weights.len()),
            ));
        }
        unsafe { slice::from_raw_parts_mut(out, out_len) }.copy_from_slice(&beta.weights);
        Ok(())
    })
}
