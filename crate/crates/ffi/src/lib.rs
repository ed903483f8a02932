//! C ABI for the curved-space Dirac library.
//!
//! The surface follows the usual handle pattern: `cd_params_new` and the
//! `cd_profile_*` constructors allocate opaque objects that the caller owns
//! and must release with the matching `cd_*_free`; every other function
//! borrows them immutably, so handles may be shared across threads once
//! built. All fallible calls return a [`CdStatus`]; results travel through
//! out-pointers that are written only on `CD_OK`.
//!
//! On failure the human-readable detail is stored per thread and available
//! through `cd_last_error_message` until the next failing call on the same
//! thread; copy it before calling anything else. Panics never cross the
//! boundary: they are caught and reported as `CD_ERR_PANIC`.
//!
//! The committed header `include/curved_dirac.h` is maintained by hand and
//! must be kept in sync with the exported signatures.

use std::cell::RefCell;
use std::ffi::CString;
use std::os::raw::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};

use curved_dirac::background::BackgroundProfile;
use curved_dirac::free::{self, Subspace};
use curved_dirac::interacting::{self, PotentialConfig};
use curved_dirac::{Branch, Error, ModelParams, Spinor2};
use num_complex::Complex64;

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdStatus {
    /// Success; out-pointers hold the results.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Arguments violate a model constraint or accept no closed form.
    InvalidArgument = 2,
    /// The evaluation point lies outside the profile domain.
    OutOfDomain = 3,
    /// The request hits a structural singularity (zero metric, degenerate
    /// energy, matching or balance singularity, special-function pole).
    Singular = 4,
    /// A numerical method failed to reach its accuracy or converge.
    Numerical = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// Opaque model-parameter handle.
pub struct CdParams(ModelParams);

/// Opaque background-profile handle.
pub struct CdProfile(BackgroundProfile);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(text: &str) {
    let sanitized = text.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> CdStatus {
    match err {
        Error::InvalidParams(_)
        | Error::Constraint(_)
        | Error::UnsupportedFamily { .. }
        | Error::ClosedFormUnavailable(_)
        | Error::Config(_)
        | Error::Io(_)
        | Error::Json(_) => CdStatus::InvalidArgument,
        Error::OutOfDomain { .. } => CdStatus::OutOfDomain,
        Error::SingularMetric { .. }
        | Error::MatchingSingular
        | Error::DegenerateEnergy
        | Error::KummerPole { .. }
        | Error::KineticBalanceSingular { .. } => CdStatus::Singular,
        Error::BoundaryNotFound(_)
        | Error::NonConvergence { .. }
        | Error::BlowUp { .. }
        | Error::Accuracy(_)
        | Error::TurningPoint { .. } => CdStatus::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), Error>>(body: F) -> CdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CdStatus::Ok,
        Ok(Err(err)) => {
            set_last_error(&err.to_string());
            status_of(&err)
        }
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&text);
            CdStatus::Panic
        }
    }
}

fn null_argument() -> CdStatus {
    set_last_error("null pointer argument");
    CdStatus::NullArgument
}

fn invalid(text: &str) -> Error {
    Error::InvalidParams(text.into())
}

unsafe fn params_ref<'a>(p: *const CdParams) -> Option<&'a ModelParams> {
    p.as_ref().map(|w| &w.0)
}

unsafe fn profile_ref<'a>(p: *const CdProfile) -> Option<&'a BackgroundProfile> {
    p.as_ref().map(|w| &w.0)
}

fn subspace_of(tag: c_int) -> Result<Subspace, Error> {
    match tag {
        0 => Ok(Subspace::PositiveEnergy),
        1 => Ok(Subspace::NegativeEnergy),
        _ => Err(invalid(&format!(
            "subspace must be 0 (positive) or 1 (negative), got {tag}"
        ))),
    }
}

fn branch_of(tag: c_int) -> Result<Branch, Error> {
    match tag {
        1 => Ok(Branch::Pos),
        -1 => Ok(Branch::Neg),
        _ => Err(invalid(&format!("branch must be +1 or -1, got {tag}"))),
    }
}

fn write_spinor(out: *mut f64, psi: &Spinor2) {
    unsafe {
        *out = psi.up.re;
        *out.add(1) = psi.up.im;
        *out.add(2) = psi.dn.re;
        *out.add(3) = psi.dn.im;
    }
}

/// Static name of a status code, always a valid C string.
#[no_mangle]
pub extern "C" fn cd_status_message(status: CdStatus) -> *const c_char {
    let text: &'static [u8] = match status {
        CdStatus::Ok => b"ok\0",
        CdStatus::NullArgument => b"null pointer argument\0",
        CdStatus::InvalidArgument => b"invalid argument\0",
        CdStatus::OutOfDomain => b"evaluation point outside the profile domain\0",
        CdStatus::Singular => b"structural singularity\0",
        CdStatus::Numerical => b"numerical failure\0",
        CdStatus::Panic => b"internal panic\0",
    };
    text.as_ptr().cast()
}

/// Detail text of the most recent failure on the calling thread.
///
/// The pointer stays valid until the next failing call on the same thread;
/// copy the string before making further calls. Returns an empty string if
/// nothing failed yet.
#[no_mangle]
pub extern "C" fn cd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Allocates model parameters after validating them.
///
/// # Safety
///
/// `out` must be a valid pointer; on `CD_OK` it receives a handle that the
/// caller must release with `cd_params_free`.
#[no_mangle]
pub unsafe extern "C" fn cd_params_new(
    alpha: f64,
    tau: f64,
    lambda: f64,
    mass: f64,
    curvature_r: f64,
    out: *mut *mut CdParams,
) -> CdStatus {
    if out.is_null() {
        return null_argument();
    }
    guard(|| {
        let params = ModelParams::new(alpha, tau, lambda, mass, curvature_r)?;
        *out = Box::into_raw(Box::new(CdParams(params)));
        Ok(())
    })
}

/// Releases a parameter handle; a null pointer is ignored.
///
/// # Safety
///
/// `params` must be a handle from `cd_params_new` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn cd_params_free(params: *mut CdParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

unsafe fn build_profile(
    out: *mut *mut CdProfile,
    build: impl FnOnce() -> Result<BackgroundProfile, Error>,
) -> CdStatus {
    if out.is_null() {
        return null_argument();
    }
    guard(|| {
        let profile = build()?;
        *out = Box::into_raw(Box::new(CdProfile(profile)));
        Ok(())
    })
}

/// Builds the linear/flat profile from `theta`, `xi` and the slope sign.
///
/// # Safety
///
/// `params` must be a live handle from `cd_params_new` and `out` a valid
/// pointer; on `CD_OK` it receives a handle owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_linear_flat(
    params: *const CdParams,
    theta: f64,
    xi: f64,
    sign_a1: c_int,
    out: *mut *mut CdProfile,
) -> CdStatus {
    let Some(p) = params_ref(params) else {
        return null_argument();
    };
    build_profile(out, || {
        let sign = i8::try_from(sign_a1)
            .map_err(|_| invalid(&format!("sign_a1 must be +1 or -1, got {sign_a1}")))?;
        BackgroundProfile::linear_flat(p, theta, xi, sign)
    })
}

/// Builds the positive-constant-curvature hyperbolic profile.
///
/// # Safety
///
/// Same handle and pointer rules as `cd_profile_linear_flat`.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_hyperbolic(
    params: *const CdParams,
    zeta: f64,
    vartheta: f64,
    a0: f64,
    out: *mut *mut CdProfile,
) -> CdStatus {
    let Some(p) = params_ref(params) else {
        return null_argument();
    };
    build_profile(out, || BackgroundProfile::hyperbolic(p, zeta, vartheta, a0))
}

/// Builds the negative-constant-curvature trigonometric profile.
///
/// # Safety
///
/// Same handle and pointer rules as `cd_profile_linear_flat`.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_trig(
    params: *const CdParams,
    zeta: f64,
    vartheta: f64,
    a0: f64,
    out: *mut *mut CdProfile,
) -> CdStatus {
    let Some(p) = params_ref(params) else {
        return null_argument();
    };
    build_profile(out, || BackgroundProfile::trig(p, zeta, vartheta, a0))
}

/// Builds the critical inverse-square-curvature profile.
///
/// # Safety
///
/// Same handle and pointer rules as `cd_profile_linear_flat`.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_inverse_square(
    params: *const CdParams,
    a0: f64,
    a1: f64,
    b0: f64,
    b1: f64,
    out: *mut *mut CdProfile,
) -> CdStatus {
    let Some(p) = params_ref(params) else {
        return null_argument();
    };
    build_profile(out, || {
        BackgroundProfile::inverse_square(p, a0, a1, b0, b1)
    })
}

/// Builds the flat profile with constant `a0` and vanishing b.
///
/// # Safety
///
/// Same handle and pointer rules as `cd_profile_linear_flat`.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_flat(
    params: *const CdParams,
    a0: f64,
    out: *mut *mut CdProfile,
) -> CdStatus {
    let Some(p) = params_ref(params) else {
        return null_argument();
    };
    build_profile(out, || BackgroundProfile::flat(p, a0))
}

/// Releases a profile handle; a null pointer is ignored.
///
/// # Safety
///
/// `profile` must be a handle from a `cd_profile_*` constructor that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_free(profile: *mut CdProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Reads the constant torsion scalar eta of the profile.
///
/// # Safety
///
/// `profile` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_eta(profile: *const CdProfile, out: *mut f64) -> CdStatus {
    let Some(p) = profile_ref(profile) else {
        return null_argument();
    };
    if out.is_null() {
        return null_argument();
    }
    guard(|| {
        *out = p.eta();
        Ok(())
    })
}

/// Reads the open domain boundaries of the profile.
///
/// # Safety
///
/// `profile` must be a live handle; `lo` and `hi` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_domain(
    profile: *const CdProfile,
    lo: *mut f64,
    hi: *mut f64,
) -> CdStatus {
    let Some(p) = profile_ref(profile) else {
        return null_argument();
    };
    if lo.is_null() || hi.is_null() {
        return null_argument();
    }
    guard(|| {
        let (a, b) = p.domain();
        *lo = a;
        *hi = b;
        Ok(())
    })
}

/// Samples the profile pair at `x`: `out` receives `a, a', b, b'`.
///
/// # Safety
///
/// `profile` must be a live handle and `out` must point to at least four
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_local(
    profile: *const CdProfile,
    x: f64,
    out: *mut f64,
) -> CdStatus {
    let Some(p) = profile_ref(profile) else {
        return null_argument();
    };
    if out.is_null() {
        return null_argument();
    }
    guard(|| {
        let l = p.local(x)?;
        *out = l.a;
        *out.add(1) = l.ap;
        *out.add(2) = l.b;
        *out.add(3) = l.bp;
        Ok(())
    })
}

/// Evaluates the time-time component of the contravariant metric at `x`.
///
/// # Safety
///
/// `profile` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_g00(
    profile: *const CdProfile,
    x: f64,
    out: *mut f64,
) -> CdStatus {
    let Some(p) = profile_ref(profile) else {
        return null_argument();
    };
    if out.is_null() {
        return null_argument();
    }
    guard(|| {
        p.local(x)?;
        *out = p.g00(x);
        Ok(())
    })
}

/// Evaluates the torsion scalar at `x`; constant and equal to eta on valid
/// profiles, so this is a consistency diagnostic.
///
/// # Safety
///
/// `profile` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_sigma0(
    profile: *const CdProfile,
    x: f64,
    out: *mut f64,
) -> CdStatus {
    let Some(p) = profile_ref(profile) else {
        return null_argument();
    };
    if out.is_null() {
        return null_argument();
    }
    guard(|| {
        p.local(x)?;
        *out = p.sigma0(x);
        Ok(())
    })
}

/// Evaluates the flattening coordinate y(x) and the phase coordinate q(x).
///
/// # Safety
///
/// `profile` must be a live handle; `y` and `q` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cd_profile_maps(
    profile: *const CdProfile,
    x: f64,
    y: *mut f64,
    q: *mut f64,
) -> CdStatus {
    let Some(p) = profile_ref(profile) else {
        return null_argument();
    };
    if y.is_null() || q.is_null() {
        return null_argument();
    }
    guard(|| {
        *y = p.y(x)?;
        *q = p.q(x)?;
        Ok(())
    })
}

/// Computes the envelope decay rate and signed wavenumber at `epsilon`.
///
/// `omega = 0` marks the flat scattering regime; `wavenumber` then carries
/// the plane-wave rate instead.
///
/// # Safety
///
/// `omega` and `wavenumber` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cd_decay_parameter(
    epsilon: f64,
    mass: f64,
    eta: f64,
    omega: *mut f64,
    wavenumber: *mut f64,
) -> CdStatus {
    if omega.is_null() || wavenumber.is_null() {
        return null_argument();
    }
    guard(|| {
        let dd = free::decay_parameter(epsilon, mass, eta)?;
        *omega = dd.omega;
        *wavenumber = dd.wavenumber;
        Ok(())
    })
}

unsafe fn free_spinor_at(
    profile: &BackgroundProfile,
    epsilon: f64,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    subspace: c_int,
    t: f64,
    x: f64,
) -> Result<Spinor2, Error> {
    let spinor = free::FreeSpinor::matched(
        profile,
        epsilon,
        Complex64::new(a_re, a_im),
        Complex64::new(b_re, b_im),
        subspace_of(subspace)?,
    )?;
    free::evaluate_spinor(profile, &spinor, t, x)
}

/// Evaluates the interaction-free solution at `(t, x)` for the given
/// right-branch constants; `out` receives `re_up, im_up, re_dn, im_dn`.
///
/// # Safety
///
/// `profile` must be a live handle and `out` must point to at least four
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_free_spinor(
    profile: *const CdProfile,
    epsilon: f64,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    subspace: c_int,
    t: f64,
    x: f64,
    out: *mut f64,
) -> CdStatus {
    let Some(p) = profile_ref(profile) else {
        return null_argument();
    };
    if out.is_null() {
        return null_argument();
    }
    guard(|| {
        let psi = free_spinor_at(p, epsilon, a_re, a_im, b_re, b_im, subspace, t, x)?;
        write_spinor(out, &psi);
        Ok(())
    })
}

/// Evaluates the probability density of the interaction-free solution.
///
/// # Safety
///
/// `profile` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_free_density(
    profile: *const CdProfile,
    epsilon: f64,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    subspace: c_int,
    t: f64,
    x: f64,
    out: *mut f64,
) -> CdStatus {
    let Some(p) = profile_ref(profile) else {
        return null_argument();
    };
    if out.is_null() {
        return null_argument();
    }
    guard(|| {
        let psi = free_spinor_at(p, epsilon, a_re, a_im, b_re, b_im, subspace, t, x)?;
        *out = free::probability_density(p, &psi, x)?;
        Ok(())
    })
}

unsafe fn morse_spinor_at(
    profile: &BackgroundProfile,
    s0: f64,
    w0: f64,
    epsilon: f64,
    branch: c_int,
    t: f64,
    x: f64,
) -> Result<Spinor2, Error> {
    let branch = branch_of(branch)?;
    let mp = interacting::morse_reduce(profile, s0, w0, epsilon, branch)?;
    let config = PotentialConfig::morse(s0, w0);
    interacting::evaluate_interacting_spinor(profile, &config, &mp, t, x)
}

/// Evaluates the closed-form solution of the pseudo-scalar plus
/// pseudo-vector coupling at `(t, x)` on the chosen branch; `out` receives
/// `re_up, im_up, re_dn, im_dn`. Requires the linear profile and an
/// admissible coupling `S0 + W0 = +/- eta / 2`.
///
/// # Safety
///
/// `profile` must be a live handle and `out` must point to at least four
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cd_morse_spinor(
    profile: *const CdProfile,
    s0: f64,
    w0: f64,
    epsilon: f64,
    branch: c_int,
    t: f64,
    x: f64,
    out: *mut f64,
) -> CdStatus {
    let Some(p) = profile_ref(profile) else {
        return null_argument();
    };
    if out.is_null() {
        return null_argument();
    }
    guard(|| {
        let psi = morse_spinor_at(p, s0, w0, epsilon, branch, t, x)?;
        write_spinor(out, &psi);
        Ok(())
    })
}

/// Evaluates the probability density of the interacting closed form.
///
/// # Safety
///
/// `profile` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cd_morse_density(
    profile: *const CdProfile,
    s0: f64,
    w0: f64,
    epsilon: f64,
    branch: c_int,
    t: f64,
    x: f64,
    out: *mut f64,
) -> CdStatus {
    let Some(p) = profile_ref(profile) else {
        return null_argument();
    };
    if out.is_null() {
        return null_argument();
    }
    guard(|| {
        let psi = morse_spinor_at(p, s0, w0, epsilon, branch, t, x)?;
        *out = free::probability_density(p, &psi, x)?;
        Ok(())
    })
}
