//! C ABI for `hsmoments`.
//!
//! Results are returned through opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`HsStatus`]; on failure [`hs_last_error_message`] describes the error
//! on the calling thread. Strings returned as `char *` are released with
//! [`hs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hsmoments::mc::{self, McConfig, McOutput, McRequest};
use hsmoments::moments::{self, CanonicalFactor, FixedKMethod};
use hsmoments::poly::{rational_text, Budget};
use hsmoments::{density, Ensemble, Error, Rational};

/// Status codes of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BudgetExceeded = 3,
    VerificationFailure = 4,
    RangeViolation = 5,
    Numerical = 6,
    Internal = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HsEnsemble {
    TwoRebit = 0,
    TwoQubit = 1,
    RebitRetrit = 2,
    QubitQutrit = 3,
}

impl From<HsEnsemble> for Ensemble {
    fn from(e: HsEnsemble) -> Self {
        match e {
            HsEnsemble::TwoRebit => Ensemble::TwoRebit,
            HsEnsemble::TwoQubit => Ensemble::TwoQubit,
            HsEnsemble::RebitRetrit => Ensemble::RebitRetrit,
            HsEnsemble::QubitQutrit => Ensemble::QubitQutrit,
        }
    }
}

impl From<Ensemble> for HsEnsemble {
    fn from(e: Ensemble) -> Self {
        match e {
            Ensemble::TwoRebit => HsEnsemble::TwoRebit,
            Ensemble::TwoQubit => HsEnsemble::TwoQubit,
            Ensemble::RebitRetrit => HsEnsemble::RebitRetrit,
            Ensemble::QubitQutrit => HsEnsemble::QubitQutrit,
        }
    }
}

/// An exact rational number.
pub struct HsRational(Rational);

/// An adjustment factor `F_κ(k)` in reduced form.
pub struct HsFactor(CanonicalFactor);

/// Monte Carlo estimates of `⟨|ρ|^k |ρ^PT|^κ⟩` for `k, κ ≤ max_order`,
/// and of the separability probability.
pub struct HsMcResult {
    max_order: u32,
    output: McOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HsStatus {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch(_) | Error::Parse(_) => HsStatus::InvalidArgument,
        Error::BudgetExceeded(_) => HsStatus::BudgetExceeded,
        Error::StructureViolation(_) | Error::Disagreement(_) | Error::Singular(_) => HsStatus::VerificationFailure,
        Error::RangeViolation(_) => HsStatus::RangeViolation,
        Error::Quadrature(_) => HsStatus::Numerical,
        Error::Io(_) | Error::Json(_) => HsStatus::Internal,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard<F: FnOnce() -> Result<(), (HsStatus, String)>>(f: F) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            HsStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (HsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HsStatus, String) {
    (HsStatus::NullPointer, format!("{what} is null"))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

unsafe fn put<T>(out: *mut *mut T, v: T) {
    *out = Box::into_raw(Box::new(v));
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn hs_version() -> *const c_char {
    static V: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    V.as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `two-rebit`, `two-qubit`, `rebit-retrit` or `qubit-qutrit`.
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_ensemble_from_name(name: *const c_char, out: *mut HsEnsemble) -> HsStatus {
    guard(|| {
        if name.is_null() {
            return Err(null("name"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(name).to_str().map_err(|_| (HsStatus::InvalidArgument, "name is not UTF-8".into()))?;
        *out = s.parse::<Ensemble>().map_err(lib_err)?.into();
        Ok(())
    })
}

/// Exact `⟨|ρ|^k |ρ^PT|^κ⟩`.
///
/// # Safety
/// `out` must be writable; the handle it receives is freed with
/// `hs_rational_free`.
#[no_mangle]
pub unsafe extern "C" fn hs_exact_moment(
    ensemble: HsEnsemble,
    k: u32,
    kappa: u32,
    out: *mut *mut HsRational,
) -> HsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = Ensemble::from(ensemble).spec();
        let r = moments::joint_moment_exact(&spec, k, kappa, FixedKMethod::Paired, &Budget::from_environment())
            .map_err(lib_err)?;
        put(out, HsRational(r.value));
        Ok(())
    })
}

/// `num/den` text of a rational.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_rational_to_string(r: *const HsRational) -> *mut c_char {
    match r.as_ref() {
        Some(r) => owned_string(rational_text(&r.0)),
        None => ptr::null_mut(),
    }
}

/// Nearest double, NaN for a NULL handle.
///
/// # Safety
/// `r` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_rational_to_double(r: *const HsRational) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.to_f64())
}

/// # Safety
/// `r` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_rational_free(r: *mut HsRational) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Adjustment factor `F_κ(k)` as a rational function of `k`. With
/// `max_terms == 0` the default resource budget applies and `κ` is limited
/// to the default range of the ensemble.
///
/// # Safety
/// `out` must be writable; the handle it receives is freed with
/// `hs_factor_free`.
#[no_mangle]
pub unsafe extern "C" fn hs_symbolic_factor(
    ensemble: HsEnsemble,
    kappa: u32,
    max_terms: u64,
    out: *mut *mut HsFactor,
) -> HsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let e = Ensemble::from(ensemble);
        let budget = if max_terms == 0 {
            let limit = moments::default_max_kappa(e);
            if kappa > limit {
                return Err((
                    HsStatus::BudgetExceeded,
                    format!("κ = {kappa} above the default range κ ≤ {limit} for {e}"),
                ));
            }
            Budget::from_environment()
        } else {
            Budget::with_max_terms(usize::try_from(max_terms).unwrap_or(usize::MAX))
        };
        let f = moments::adjustment_factor_symbolic(&e.spec(), kappa, &budget).map_err(lib_err)?;
        put(out, HsFactor(f));
        Ok(())
    })
}

/// Number of numerator coefficients (degree + 1), 0 for a NULL handle.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_factor_numerator_len(f: *const HsFactor) -> usize {
    f.as_ref().map_or(0, |f| f.0.function.numerator.coeffs().len())
}

/// Coefficient of `k^i` in the numerator as `num/den` text, or NULL when
/// out of range.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_factor_numerator_coeff(f: *const HsFactor, i: usize) -> *mut c_char {
    match f.as_ref().and_then(|f| f.0.function.numerator.coeffs().get(i)) {
        Some(c) => owned_string(rational_text(c)),
        None => ptr::null_mut(),
    }
}

/// Denominator in product form, e.g. `32(k+3)(4k+11)(4k+13)`.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hs_factor_denominator_form(f: *const HsFactor) -> *mut c_char {
    match f.as_ref() {
        Some(f) => owned_string(f.0.denominator_form.to_string()),
        None => ptr::null_mut(),
    }
}

/// `F_κ(k)` at integer `k`.
///
/// # Safety
/// `f` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_factor_eval(f: *const HsFactor, k: i64, out: *mut *mut HsRational) -> HsStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("factor"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = f.0.function.eval_int(k).map_err(lib_err)?;
        put(out, HsRational(v));
        Ok(())
    })
}

/// # Safety
/// `f` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_factor_free(f: *mut HsFactor) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Monte Carlo pass over `samples` states with the given seed and working
/// precision in bits (0 selects 256).
///
/// # Safety
/// `out` must be writable; the handle it receives is freed with
/// `hs_mc_free`.
#[no_mangle]
pub unsafe extern "C" fn hs_mc_run(
    ensemble: HsEnsemble,
    samples: u64,
    seed: u64,
    precision_bits: u32,
    max_order: u32,
    out: *mut *mut HsMcResult,
) -> HsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut config = McConfig::new(ensemble.into(), samples, seed);
        if precision_bits != 0 {
            config.precision_bits = precision_bits;
        }
        let pairs = (0..=max_order).flat_map(|k| (0..=max_order).map(move |q| (k, q))).collect();
        let req = McRequest { pairs, separability: true, ..Default::default() };
        let output = mc::run(&config, &req).map_err(lib_err)?;
        put(out, HsMcResult { max_order, output });
        Ok(())
    })
}

/// Estimate and standard error of `⟨|ρ|^k |ρ^PT|^κ⟩`.
///
/// # Safety
/// `r` must be a live handle; `estimate` and `stderr_out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_mc_moment(
    r: *const HsMcResult,
    k: u32,
    kappa: u32,
    estimate: *mut f64,
    stderr_out: *mut f64,
) -> HsStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("result"))?;
        if estimate.is_null() || stderr_out.is_null() {
            return Err(null("output pointer"));
        }
        if k > r.max_order || kappa > r.max_order {
            return Err((HsStatus::InvalidArgument, format!("(k, κ) = ({k}, {kappa}) beyond order {}", r.max_order)));
        }
        let e = &r.output.moments[(k * (r.max_order + 1) + kappa) as usize];
        *estimate = e.estimate.to_f64();
        *stderr_out = e.stderr.to_f64();
        Ok(())
    })
}

/// Estimate and standard error of the separability probability.
///
/// # Safety
/// `r` must be a live handle; `estimate` and `stderr_out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_mc_separability(
    r: *const HsMcResult,
    estimate: *mut f64,
    stderr_out: *mut f64,
) -> HsStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("result"))?;
        if estimate.is_null() || stderr_out.is_null() {
            return Err(null("output pointer"));
        }
        let e = r.output.separability.as_ref().expect("requested");
        *estimate = e.estimate.to_f64();
        *stderr_out = e.stderr.to_f64();
        Ok(())
    })
}

/// # Safety
/// `r` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_mc_free(r: *mut HsMcResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Two-rebit density of `t = 2^8|ρ|` at `t ∈ [0, 1]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_density_eval(t: f64, out: *mut f64) -> HsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = density::density_eval_f64(t).map_err(lib_err)?;
        Ok(())
    })
}
