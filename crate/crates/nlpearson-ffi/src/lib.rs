//! C ABI over the `nlpearson` library.
//!
//! Objects are opaque handles created by `*_new`/`*_from_json` functions and
//! released by the matching `*_free`. Every fallible call returns an
//! [`NlpStatus`]; on failure the message is available from
//! [`nlp_last_error_message`] on the same thread until the next failing call.
//! Panics are caught at the boundary and reported as `NLP_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use nlpearson::bernstein::{BernsteinDescriptor, Dependence, PhiSpec};
use nlpearson::montecarlo::{simulate_nonlocal, Scheme, SimParams, Start, TrajectorySet};
use nlpearson::pearson::{make_family, Category, FamilySpec, PearsonFamily};
use nlpearson::relaxation::RelaxationEvaluator;
use nlpearson::spectral::SpectralExpansion;
use nlpearson::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    Parameter = 4,
    Domain = 5,
    SpectrumBound = 6,
    Numeric = 7,
    Resolution = 8,
    Datum = 9,
    Unsupported = 10,
    Config = 11,
    Misuse = 12,
    Io = 13,
    BufferTooSmall = 14,
    Panic = 15,
}

/// Spectral category of a family.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlpCategory {
    Discrete = 1,
    DiscreteAndSimpleContinuous = 2,
    DiscreteAndDoubleContinuous = 3,
}

/// Dependence class of a stationary time-changed process.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NlpDependence {
    ShortRange = 0,
    LongRange = 1,
    Unknown = 2,
}

/// A Pearson diffusion family.
pub struct NlpFamily(PearsonFamily);

/// A Bernstein function driving the time change.
pub struct NlpPhi(BernsteinDescriptor);

/// A spectral expansion of the transition density.
pub struct NlpSpectral(SpectralExpansion);

/// Simulated paths, stored time-major.
pub struct NlpTrajectories(TrajectorySet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NlpStatus {
    match e {
        Error::Parameter(_) => NlpStatus::Parameter,
        Error::Domain(_) => NlpStatus::Domain,
        Error::SpectrumBound(_) => NlpStatus::SpectrumBound,
        Error::Numeric(_) => NlpStatus::Numeric,
        Error::Resolution(_) => NlpStatus::Resolution,
        Error::Datum(_) => NlpStatus::Datum,
        Error::Unsupported(_) => NlpStatus::Unsupported,
        Error::Config(_) => NlpStatus::Config,
        Error::Misuse(_) => NlpStatus::Misuse,
        Error::Io(_) => NlpStatus::Io,
    }
}

struct Failure(NlpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NlpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlpStatus::Ok,
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            NlpStatus::Panic
        }
    }
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(NlpStatus::NullPointer, format!("{what} is null")))
}

unsafe fn output<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure(NlpStatus::NullPointer, format!("{what} is null")))
}

unsafe fn json<T: serde::de::DeserializeOwned>(s: *const c_char) -> Result<T, Failure> {
    if s.is_null() {
        return Err(Failure(NlpStatus::NullPointer, "JSON string is null".into()));
    }
    let text = CStr::from_ptr(s).to_str().map_err(|e| Failure(NlpStatus::InvalidUtf8, e.to_string()))?;
    serde_json::from_str(text).map_err(|e| Failure(NlpStatus::InvalidJson, e.to_string()))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    Ok(std::slice::from_raw_parts(reference(p, what)?, n))
}

unsafe fn slice_mut<'a>(p: *mut f64, n: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if n == 0 {
        return Ok(&mut []);
    }
    Ok(std::slice::from_raw_parts_mut(output(p, what)?, n))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn release<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nlp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nlp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Builds a family from a JSON descriptor such as
/// `{"kind":"cir","theta":1,"a":1,"b":2}`.
#[no_mangle]
pub unsafe extern "C" fn nlp_family_from_json(spec: *const c_char, out: *mut *mut NlpFamily) -> NlpStatus {
    guard(|| {
        let out = output(out, "out")?;
        let spec: FamilySpec = json(spec)?;
        *out = boxed(NlpFamily(make_family(spec)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nlp_family_free(family: *mut NlpFamily) {
    release(family)
}

#[no_mangle]
pub unsafe extern "C" fn nlp_family_category(family: *const NlpFamily, out: *mut NlpCategory) -> NlpStatus {
    guard(|| {
        *output(out, "out")? = match reference(family, "family")?.0.category() {
            Category::I => NlpCategory::Discrete,
            Category::II => NlpCategory::DiscreteAndSimpleContinuous,
            Category::III => NlpCategory::DiscreteAndDoubleContinuous,
        };
        Ok(())
    })
}

/// Stationary density m(x).
#[no_mangle]
pub unsafe extern "C" fn nlp_family_stationary_density(family: *const NlpFamily, x: f64, out: *mut f64) -> NlpStatus {
    guard(|| {
        *output(out, "out")? = reference(family, "family")?.0.stationary_density(x)?;
        Ok(())
    })
}

/// Discrete eigenvalue λ_n.
#[no_mangle]
pub unsafe extern "C" fn nlp_family_eigenvalue(family: *const NlpFamily, n: usize, out: *mut f64) -> NlpStatus {
    guard(|| {
        *output(out, "out")? = reference(family, "family")?.0.eigenvalue(n)?;
        Ok(())
    })
}

/// Builds a Bernstein function from a JSON descriptor such as
/// `{"kind":"stable","alpha":0.5}`.
#[no_mangle]
pub unsafe extern "C" fn nlp_phi_from_json(spec: *const c_char, out: *mut *mut NlpPhi) -> NlpStatus {
    guard(|| {
        let out = output(out, "out")?;
        let spec: PhiSpec = json(spec)?;
        *out = boxed(NlpPhi(BernsteinDescriptor::from_spec(&spec)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nlp_phi_free(phi: *mut NlpPhi) {
    release(phi)
}

/// Φ(λ).
#[no_mangle]
pub unsafe extern "C" fn nlp_phi_eval(phi: *const NlpPhi, lambda: f64, out: *mut f64) -> NlpStatus {
    guard(|| {
        *output(out, "out")? = reference(phi, "phi")?.0.eval_phi(lambda)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nlp_phi_classify(phi: *const NlpPhi, out: *mut NlpDependence) -> NlpStatus {
    guard(|| {
        *output(out, "out")? = match reference(phi, "phi")?.0.classify_dependence() {
            Dependence::ShortRange => NlpDependence::ShortRange,
            Dependence::LongRange => NlpDependence::LongRange,
            Dependence::Unknown => NlpDependence::Unknown,
        };
        Ok(())
    })
}

/// Relaxation function E[exp(−λ L(t))] for the time change `phi`.
#[no_mangle]
pub unsafe extern "C" fn nlp_relaxation(phi: *const NlpPhi, t: f64, lambda: f64, out: *mut f64) -> NlpStatus {
    guard(|| {
        let phi = reference(phi, "phi")?;
        *output(out, "out")? = RelaxationEvaluator::new(phi.0.clone()).eigenfunction(t, lambda)?;
        Ok(())
    })
}

/// Spectral expansion for `family`; pass NULL for `phi` to get the classical
/// (untime-changed) transition density.
#[no_mangle]
pub unsafe extern "C" fn nlp_spectral_new(
    family: *const NlpFamily,
    phi: *const NlpPhi,
    out: *mut *mut NlpSpectral,
) -> NlpStatus {
    guard(|| {
        let out = output(out, "out")?;
        let f = &reference(family, "family")?.0;
        let se = match phi.as_ref() {
            Some(p) => SpectralExpansion::nonlocal(f, p.0.clone())?,
            None => SpectralExpansion::classical(f)?,
        };
        *out = boxed(NlpSpectral(se));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nlp_spectral_free(spectral: *mut NlpSpectral) {
    release(spectral)
}

/// Transition density p(t, x_i; x0) for `n` points. `bounds` may be NULL;
/// otherwise it receives the truncation bound of each value, NaN where none
/// is available.
#[no_mangle]
pub unsafe extern "C" fn nlp_spectral_density(
    spectral: *const NlpSpectral,
    t: f64,
    x0: f64,
    xs: *const f64,
    n: usize,
    values: *mut f64,
    bounds: *mut f64,
) -> NlpStatus {
    guard(|| {
        let se = &reference(spectral, "spectral")?.0;
        let xs = slice(xs, n, "xs")?;
        let values = slice_mut(values, n, "values")?;
        let pts = se.density_grid(t, xs, x0)?;
        for (v, p) in values.iter_mut().zip(&pts) {
            *v = p.value;
        }
        if !bounds.is_null() {
            for (b, p) in slice_mut(bounds, n, "bounds")?.iter_mut().zip(&pts) {
                *b = p.bound.unwrap_or(f64::NAN);
            }
        }
        Ok(())
    })
}

/// Simulates X(L(t)) on the grid k·horizon/n_obs, k = 0..n_obs. A NaN `x0`
/// starts the paths from the stationary law. `exact` selects exact OU
/// transitions instead of the Euler scheme.
#[no_mangle]
pub unsafe extern "C" fn nlp_simulate_nonlocal(
    family: *const NlpFamily,
    phi: *const NlpPhi,
    x0: f64,
    horizon: f64,
    n_obs: usize,
    n_paths: usize,
    seed: u64,
    exact: bool,
    out: *mut *mut NlpTrajectories,
) -> NlpStatus {
    guard(|| {
        let out = output(out, "out")?;
        let f = &reference(family, "family")?.0;
        let d = &reference(phi, "phi")?.0;
        let start = if x0.is_nan() { Start::Stationary } else { Start::Point { x: x0 } };
        let p = SimParams {
            horizon,
            n_obs,
            n_paths,
            seed,
            scheme: if exact { Scheme::Exact } else { Scheme::Euler },
            ..SimParams::default()
        };
        *out = boxed(NlpTrajectories(simulate_nonlocal(f, d, start, &p)?));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nlp_trajectories_free(ts: *mut NlpTrajectories) {
    release(ts)
}

/// Number of paths and of observation times.
#[no_mangle]
pub unsafe extern "C" fn nlp_trajectories_shape(
    ts: *const NlpTrajectories,
    n_paths: *mut usize,
    n_times: *mut usize,
) -> NlpStatus {
    guard(|| {
        let ts = &reference(ts, "trajectories")?.0;
        *output(n_paths, "n_paths")? = ts.n_paths();
        *output(n_times, "n_times")? = ts.time_grid().len();
        Ok(())
    })
}

/// Copies the values of all paths at time index `j` into `buf`, which must
/// hold `len >= n_paths` doubles.
#[no_mangle]
pub unsafe extern "C" fn nlp_trajectories_marginal(
    ts: *const NlpTrajectories,
    j: usize,
    buf: *mut f64,
    len: usize,
) -> NlpStatus {
    guard(|| {
        let ts = &reference(ts, "trajectories")?.0;
        if j >= ts.time_grid().len() {
            return Err(Failure(NlpStatus::Domain, format!("time index {j} out of range")));
        }
        let m = ts.marginal(j);
        if len < m.len() {
            return Err(Failure(NlpStatus::BufferTooSmall, format!("need {} doubles, got {len}", m.len())));
        }
        slice_mut(buf, m.len(), "buf")?.copy_from_slice(m);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr::{null, null_mut};

    fn c(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(nlp_last_error_message()).to_string_lossy().into_owned() }
    }

    #[test]
    fn family_round_trip() {
        unsafe {
            let mut f = null_mut();
            let spec = c(r#"{"kind":"ou","theta":1,"mu":0,"sigma":1}"#);
            assert_eq!(nlp_family_from_json(spec.as_ptr(), &mut f), NlpStatus::Ok);
            let mut m = 0.0;
            assert_eq!(nlp_family_stationary_density(f, 0.0, &mut m), NlpStatus::Ok);
            assert!((m - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-14);
            let mut lam = 0.0;
            assert_eq!(nlp_family_eigenvalue(f, 3, &mut lam), NlpStatus::Ok);
            assert_eq!(lam, 3.0);
            let mut cat = NlpCategory::DiscreteAndDoubleContinuous;
            assert_eq!(nlp_family_category(f, &mut cat), NlpStatus::Ok);
            assert_eq!(cat, NlpCategory::Discrete);
            nlp_family_free(f);
        }
    }

    #[test]
    fn errors_carry_codes_and_messages() {
        unsafe {
            let mut f = null_mut();
            assert_eq!(nlp_family_from_json(c("{").as_ptr(), &mut f), NlpStatus::InvalidJson);
            assert!(f.is_null());
            let bad = c(r#"{"kind":"ou","theta":-1,"mu":0,"sigma":1}"#);
            assert_eq!(nlp_family_from_json(bad.as_ptr(), &mut f), NlpStatus::Parameter);
            assert!(last_error().contains("theta"), "{}", last_error());
            assert_eq!(nlp_family_from_json(null(), &mut f), NlpStatus::NullPointer);
            let mut v = 0.0;
            assert_eq!(nlp_phi_eval(null(), 1.0, &mut v), NlpStatus::NullPointer);
            let student = c(r#"{"kind":"student","theta":1,"delta":1,"nu":6,"mu":0,"mu_prime":0}"#);
            assert_eq!(nlp_family_from_json(student.as_ptr(), &mut f), NlpStatus::Ok);
            assert_eq!(nlp_family_eigenvalue(f, 7, &mut v), NlpStatus::SpectrumBound);
            nlp_family_free(f);
            nlp_family_free(null_mut());
        }
    }

    #[test]
    fn relaxation_and_density() {
        unsafe {
            let (mut f, mut p, mut s) = (null_mut(), null_mut(), null_mut());
            nlp_family_from_json(c(r#"{"kind":"ou","theta":1,"mu":0,"sigma":1}"#).as_ptr(), &mut f);
            assert_eq!(nlp_phi_from_json(c(r#"{"kind":"stable","alpha":0.5}"#).as_ptr(), &mut p), NlpStatus::Ok);
            let mut e = 0.0;
            assert_eq!(nlp_relaxation(p, 1.0, 1.0, &mut e), NlpStatus::Ok);
            assert!((e - 0.427_583_576_155_807).abs() < 1e-9);
            let mut dep = NlpDependence::Unknown;
            nlp_phi_classify(p, &mut dep);
            assert_eq!(dep, NlpDependence::LongRange);
            assert_eq!(nlp_spectral_new(f, p, &mut s), NlpStatus::Ok);
            let xs = [-1.0, 0.0, 1.0];
            let (mut v, mut b) = ([0.0; 3], [0.0; 3]);
            assert_eq!(
                nlp_spectral_density(s, 1.0, 0.0, xs.as_ptr(), 3, v.as_mut_ptr(), b.as_mut_ptr()),
                NlpStatus::Ok
            );
            assert!((v[0] - v[2]).abs() < 1e-12 && v[1] > v[0]);
            assert!(b.iter().all(|b| b.is_finite() && *b >= 0.0));
            assert_eq!(
                nlp_spectral_density(s, -1.0, 0.0, xs.as_ptr(), 3, v.as_mut_ptr(), null_mut()),
                NlpStatus::Domain
            );
            nlp_spectral_free(s);
            nlp_phi_free(p);
            nlp_family_free(f);
        }
    }

    #[test]
    fn simulation_handles() {
        unsafe {
            let (mut f, mut p, mut ts) = (null_mut(), null_mut(), null_mut());
            nlp_family_from_json(c(r#"{"kind":"ou","theta":1,"mu":0,"sigma":1}"#).as_ptr(), &mut f);
            nlp_phi_from_json(c(r#"{"kind":"gamma"}"#).as_ptr(), &mut p);
            assert_eq!(nlp_simulate_nonlocal(f, p, 0.5, 1.0, 4, 100, 3, true, &mut ts), NlpStatus::Ok);
            let (mut np, mut nt) = (0, 0);
            nlp_trajectories_shape(ts, &mut np, &mut nt);
            assert_eq!((np, nt), (100, 5));
            let mut buf = vec![0.0; 100];
            assert_eq!(nlp_trajectories_marginal(ts, 0, buf.as_mut_ptr(), 100), NlpStatus::Ok);
            assert!(buf.iter().all(|&x| x == 0.5));
            assert_eq!(nlp_trajectories_marginal(ts, 1, buf.as_mut_ptr(), 10), NlpStatus::BufferTooSmall);
            assert_eq!(nlp_trajectories_marginal(ts, 9, buf.as_mut_ptr(), 100), NlpStatus::Domain);
            nlp_trajectories_free(ts);
            nlp_phi_free(p);
            nlp_family_free(f);
        }
    }

    #[test]
    fn version_string() {
        let v = unsafe { CStr::from_ptr(nlp_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
