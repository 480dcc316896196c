//! C ABI over `es_lab`.
//!
//! Conventions:
//! - Every fallible call returns an [`EsStatus`]; results go through out
//!   pointers and are written only on success.
//! - On failure, [`es_last_error`] returns a message for the calling thread.
//! - Handles are opaque, created by `*_new` and released by `*_free`.
//! - Output arrays are caller-allocated; their lengths are passed explicitly
//!   and checked.
//! - Panics never cross the boundary; they map to [`EsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use es_lab::distributions::{cdf_exact_gen_chi2, order_stat_cdf, order_stat_pdf, GammaApprox};
use es_lab::landscape::{make_hessian, Hessian, HessianKind, Objective};
use es_lab::metrics::{alpha_posteriori, commutator_frobenius, e1, e2, normalize_hc};
use es_lab::sampling::{run_sampling, SampleConfig, SelectionMode};
use es_lab::{Error, Matrix};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Dimension = 3,
    Domain = 4,
    Singular = 5,
    NonConvergence = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Built-in Hessian families.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsHessianKind {
    Discus = 1,
    Cigar = 2,
    Ellipse = 3,
    RotatedEllipse = 4,
    HadamardEllipse = 5,
}

/// Winner recorded per iteration; `parameter` is ℓ or μ and ignored for
/// `Best`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsSelection {
    Best = 0,
    LthDegree = 1,
    MuAverage = 2,
}

/// Error measures of H·C.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EsMetrics {
    pub e1: f64,
    pub e2: f64,
    pub commutator_frob: f64,
    pub alpha: f64,
}

/// Opaque Hessian handle.
pub struct EsHessian(Hessian);

/// Opaque objective handle; owns a copy of its Hessian.
pub struct EsObjective(Objective);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EsStatus {
    match e {
        Error::Dimension(_) => EsStatus::Dimension,
        Error::InvalidParameter(_) => EsStatus::InvalidParameter,
        Error::Domain(_) => EsStatus::Domain,
        Error::Singular(_) => EsStatus::Singular,
        Error::NonConvergence { .. } => EsStatus::NonConvergence,
        Error::Io { .. } => EsStatus::Io,
    }
}

struct Fail(EsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult = Result<(), Fail>;

fn guard(f: impl FnOnce() -> FfiResult) -> EsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
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
            EsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(EsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, need: usize, what: &str) -> Result<&'a mut [f64], Fail> {
    if len < need {
        return Err(Fail(
            EsStatus::BufferTooSmall,
            format!("{what} holds {len} values, {need} needed"),
        ));
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, need))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> FfiResult {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn es_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn es_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a family Hessian of dimension `n` and condition number `c`.
/// `kind` is an [`EsHessianKind`] value; others give `InvalidParameter`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn es_hessian_new(kind: u32, n: usize, c: f64, out: *mut *mut EsHessian) -> EsStatus {
    guard(|| {
        let kind = match kind {
            k if k == EsHessianKind::Discus as u32 => HessianKind::Discus,
            k if k == EsHessianKind::Cigar as u32 => HessianKind::Cigar,
            k if k == EsHessianKind::Ellipse as u32 => HessianKind::Ellipse,
            k if k == EsHessianKind::RotatedEllipse as u32 => HessianKind::RotatedEllipse,
            k if k == EsHessianKind::HadamardEllipse as u32 => HessianKind::HadamardEllipse,
            other => return Err(Fail(EsStatus::InvalidParameter, format!("unknown Hessian kind {other}"))),
        };
        if out.is_null() {
            return Err(null("out"));
        }
        let h = make_hessian(kind, n, c)?;
        write(out, Box::into_raw(Box::new(EsHessian(h))), "out")
    })
}

/// Wraps a caller-supplied symmetric positive-definite n×n matrix
/// (row-major).
///
/// # Safety
/// `entries` must point to `n * n` readable doubles; `out` as in
/// [`es_hessian_new`].
#[no_mangle]
pub unsafe extern "C" fn es_hessian_custom(entries: *const f64, n: usize, out: *mut *mut EsHessian) -> EsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n.checked_mul(n).ok_or_else(|| Fail(EsStatus::Dimension, "n too large".into()))?;
        let data = input(entries, len, "entries")?.to_vec();
        let h = Hessian::custom(Matrix::from_row_major(n, n, data)?)?;
        write(out, Box::into_raw(Box::new(EsHessian(h))), "out")
    })
}

/// Releases a Hessian handle. Null is ignored.
///
/// # Safety
/// `h` must come from `es_hessian_new`/`es_hessian_custom` and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn es_hessian_free(h: *mut EsHessian) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of a Hessian, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_hessian_dim(h: *const EsHessian) -> usize {
    h.as_ref().map_or(0, |h| h.0.dim())
}

/// Copies the n×n entries (row-major) into `out`, which holds `len` doubles.
///
/// # Safety
/// `h` must be a live handle; `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn es_hessian_entries(h: *const EsHessian, out: *mut f64, len: usize) -> EsStatus {
    guard(|| {
        let h = deref(h, "hessian")?;
        let src = h.0.entries().as_slice();
        output(out, len, src.len(), "out")?.copy_from_slice(src);
        Ok(())
    })
}

/// Copies the ascending eigenvalues into `out`, which holds `len` doubles.
///
/// # Safety
/// As for [`es_hessian_entries`].
#[no_mangle]
pub unsafe extern "C" fn es_hessian_spectrum(h: *const EsHessian, out: *mut f64, len: usize) -> EsStatus {
    guard(|| {
        let h = deref(h, "hessian")?;
        let mut spectrum = h.0.spectrum().to_vec();
        spectrum.sort_by(f64::total_cmp);
        output(out, len, spectrum.len(), "out")?.copy_from_slice(&spectrum);
        Ok(())
    })
}

/// Objective zᵀHz + aᵀz with translation `a` of length n.
///
/// # Safety
/// `h` must be a live handle, `translation` must point to `len` doubles and
/// `out` to storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn es_objective_new(
    h: *const EsHessian,
    translation: *const f64,
    len: usize,
    out: *mut *mut EsObjective,
) -> EsStatus {
    guard(|| {
        let h = deref(h, "hessian")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let a = input(translation, len, "translation")?.to_vec();
        let obj = Objective::new(h.0.clone(), a)?;
        write(out, Box::into_raw(Box::new(EsObjective(obj))), "out")
    })
}

/// Releases an objective handle. Null is ignored.
///
/// # Safety
/// `obj` must come from `es_objective_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn es_objective_free(obj: *mut EsObjective) {
    if !obj.is_null() {
        drop(Box::from_raw(obj));
    }
}

/// Evaluates the objective at `z` (length `len`).
///
/// # Safety
/// `obj` must be live; `z` must point to `len` doubles; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn es_objective_eval(obj: *const EsObjective, z: *const f64, len: usize, value: *mut f64) -> EsStatus {
    guard(|| {
        let obj = deref(obj, "objective")?;
        let v = obj.0.eval(input(z, len, "z")?)?;
        write(value, v, "value")
    })
}

/// Copies the minimizer −½H⁻¹a into `out`.
///
/// # Safety
/// `obj` must be live; `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn es_objective_minimizer(obj: *const EsObjective, out: *mut f64, len: usize) -> EsStatus {
    guard(|| {
        let obj = deref(obj, "objective")?;
        let m = obj.0.minimizer();
        output(out, len, m.len(), "out")?.copy_from_slice(m);
        Ok(())
    })
}

/// Runs `iters` iterations of selection on `obj` (`selection` is an
/// [`EsSelection`] value) and writes the winners'
/// mean (n values), covariance (n×n, row-major, 1/N normalization) and mean
/// distance to the minimizer. `workers` threads are used; the result does
/// not depend on it.
///
/// # Safety
/// `obj` must be live; `mean` must hold `mean_len` doubles, `cov`
/// `cov_len` doubles; `mean_distance` must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn es_sample(
    obj: *const EsObjective,
    lambda: usize,
    selection: u32,
    parameter: usize,
    iters: u64,
    seed: u64,
    workers: usize,
    mean: *mut f64,
    mean_len: usize,
    cov: *mut f64,
    cov_len: usize,
    mean_distance: *mut f64,
) -> EsStatus {
    guard(|| {
        let obj = deref(obj, "objective")?;
        let n = obj.0.dim();
        let mean = output(mean, mean_len, n, "mean")?;
        let cov = output(cov, cov_len, n * n, "cov")?;
        if mean_distance.is_null() {
            return Err(null("mean_distance"));
        }
        let mode = match selection {
            s if s == EsSelection::Best as u32 => SelectionMode::Best,
            s if s == EsSelection::LthDegree as u32 => SelectionMode::LthDegree(parameter),
            s if s == EsSelection::MuAverage as u32 => SelectionMode::MuAverage(parameter),
            other => return Err(Fail(EsStatus::InvalidParameter, format!("unknown selection {other}"))),
        };
        let config = SampleConfig::new(obj.0.clone(), lambda, mode, iters, seed).with_workers(workers);
        let fin = run_sampling(&config)?.finalize()?;
        mean.copy_from_slice(&fin.mean);
        cov.copy_from_slice(fin.covariance.as_slice());
        write(mean_distance, fin.mean_distance, "mean_distance")
    })
}

/// Error measures of H against a covariance `cov` (n×n, row-major).
///
/// # Safety
/// `h` must be live; `cov` must point to `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn es_metrics(h: *const EsHessian, cov: *const f64, len: usize, out: *mut EsMetrics) -> EsStatus {
    guard(|| {
        let h = deref(h, "hessian")?;
        let n = h.0.dim();
        if len != n * n {
            return Err(Fail(EsStatus::Dimension, format!("cov has {len} values, {} expected", n * n)));
        }
        let c = Matrix::from_row_major(n, n, input(cov, len, "cov")?.to_vec())?;
        let hm = h.0.entries();
        let tilde = normalize_hc(hm, &c)?;
        let m = EsMetrics {
            e1: e1(&tilde),
            e2: if n >= 2 { e2(&tilde)? } else { 0.0 },
            commutator_frob: commutator_frobenius(hm, &c)?,
            alpha: alpha_posteriori(hm, &c).unwrap_or(f64::NAN),
        };
        write(out, m, "out")
    })
}

/// Gamma approximation (rate Υ, shape η) of zᵀHz for eigenvalues `spectrum`.
///
/// # Safety
/// `spectrum` must point to `len` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_gamma_params(spectrum: *const f64, len: usize, upsilon: *mut f64, eta: *mut f64) -> EsStatus {
    guard(|| {
        let g = GammaApprox::from_spectrum(input(spectrum, len, "spectrum")?)?;
        if eta.is_null() {
            return Err(null("eta"));
        }
        write(upsilon, g.upsilon, "upsilon")?;
        write(eta, g.eta, "eta")
    })
}

/// Exact CDF of Σ Δᵢ zᵢ² at `psi`.
///
/// # Safety
/// `spectrum` must point to `len` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn es_gen_chi2_cdf(psi: f64, spectrum: *const f64, len: usize, out: *mut f64) -> EsStatus {
    guard(|| {
        let v = cdf_exact_gen_chi2(psi, input(spectrum, len, "spectrum")?)?;
        write(out, v, "out")
    })
}

/// CDF of the ℓth smallest of λ gamma(Υ, η) values at `v`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_order_stat_cdf(v: f64, ell: u64, lambda: u64, upsilon: f64, eta: f64, out: *mut f64) -> EsStatus {
    guard(|| {
        let g = gamma(upsilon, eta)?;
        write(out, order_stat_cdf(v, ell, lambda, &g)?, "out")
    })
}

/// Density of the ℓth smallest of λ gamma(Υ, η) values at `v`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_order_stat_pdf(v: f64, ell: u64, lambda: u64, upsilon: f64, eta: f64, out: *mut f64) -> EsStatus {
    guard(|| {
        let g = gamma(upsilon, eta)?;
        write(out, order_stat_pdf(v, ell, lambda, &g)?, "out")
    })
}

fn gamma(upsilon: f64, eta: f64) -> Result<GammaApprox, Fail> {
    if upsilon > 0.0 && eta > 0.0 && upsilon.is_finite() && eta.is_finite() {
        Ok(GammaApprox { upsilon, eta })
    } else {
        Err(Fail(
            EsStatus::Domain,
            format!("gamma parameters must be positive and finite, got ({upsilon}, {eta})"),
        ))
    }
}
