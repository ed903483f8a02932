//! Interacting extension of the free solver on the flat slice `alpha = 0`.
//!
//! The wave operator acquires a vector potential `(A0, A1)` through minimal
//! coupling, a scalar shift `S` added to the mass, and a pseudo-scalar `W`
//! entering through the chirality matrix. After the same similarity and
//! phase reduction used by the free solver, plus a local gauge rotation
//! `e^{-i p(x)}` that removes `A1` and the `(b/a) A0` drag term, the spinor
//! `chi(y)` obeys a coupled first-order system with coefficients
//!
//! `A = m + S + a b W`,  `B = (epsilon - A0) + i eta`,  `C = a W`,
//!
//! and both components separately obey second-order equations whose
//! coefficients involve the `y`-derivatives of the triple.
//!
//! For the Morse family `S = S0 b`, `W = W0 / a`, `A0 = 0` on the linear-flat
//! background, the substitution `z = e^{-eta |y|}` turns the second-order
//! equation into a confluent hypergeometric equation whenever
//! `|S0 + W0| = eta / 2`. The closed form is
//! `chi_up = z^nu e^{-z/2} 1F1(nu + 1/2 - nu1; 2 nu + 1; z)` with the lower
//! component generated by kinetic balance. Away from the admissible coupling
//! strength the first-order system is integrated numerically inward from the
//! decaying tail; no eigenvalue search is performed.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::background::{BackgroundProfile, Branch, LocalBackground};
use crate::complex2::{Complex2x2, Spinor2};
use crate::error::{Error, Result};
use crate::free::decay_core;
use crate::kummer::{kummer_1f1, kummer_derivative, KummerParams};
use crate::verify::{adaptive_quadrature, rk4_coupled, GridSpec};

/// Relative threshold below which a kinetic-balance denominator counts as
/// singular.
const BALANCE_TOL: f64 = 1e-12;

/// Tolerance on `|2 |V0| / eta - 1|` for the closed-form reduction.
const ADMISSIBLE_TOL: f64 = 1e-12;

/// One real coupling profile entering the interacting wave operator.
#[derive(Clone)]
pub enum Coupling {
    /// Identically zero.
    Zero,
    /// Constant value.
    Const(f64),
    /// Coefficient times the shift profile `b(x)`.
    ScaledB(f64),
    /// Coefficient divided by the scale profile `a(x)`.
    OverA(f64),
    /// Arbitrary profile with its exact x-derivative.
    Custom {
        value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        deriv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl Coupling {
    fn value(&self, x: f64, loc: &LocalBackground) -> f64 {
        match self {
            Coupling::Zero => 0.0,
            Coupling::Const(c) => *c,
            Coupling::ScaledB(c) => c * loc.b,
            Coupling::OverA(c) => c / loc.a,
            Coupling::Custom { value, .. } => value(x),
        }
    }

    fn deriv(&self, x: f64, loc: &LocalBackground) -> f64 {
        match self {
            Coupling::Zero | Coupling::Const(_) => 0.0,
            Coupling::ScaledB(c) => c * loc.bp,
            Coupling::OverA(c) => -c * loc.ap / (loc.a * loc.a),
            Coupling::Custom { deriv, .. } => deriv(x),
        }
    }
}

impl fmt::Debug for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::Zero => write!(f, "Zero"),
            Coupling::Const(c) => write!(f, "Const({c})"),
            Coupling::ScaledB(c) => write!(f, "ScaledB({c})"),
            Coupling::OverA(c) => write!(f, "OverA({c})"),
            Coupling::Custom { .. } => write!(f, "Custom(..)"),
        }
    }
}

/// The four coupling profiles of the interacting operator.
#[derive(Clone, Debug)]
pub struct PotentialConfig {
    /// Scalar shift added to the mass.
    pub s: Coupling,
    /// Pseudo-scalar coupling.
    pub w: Coupling,
    /// Time component of the vector potential.
    pub a0: Coupling,
    /// Space component of the vector potential.
    pub a1: Coupling,
}

impl PotentialConfig {
    /// The non-interacting configuration.
    pub fn free() -> Self {
        PotentialConfig {
            s: Coupling::Zero,
            w: Coupling::Zero,
            a0: Coupling::Zero,
            a1: Coupling::Zero,
        }
    }

    /// Morse family `S = s0 b(x)`, `W = w0 / a(x)` with no vector potential.
    pub fn morse(s0: f64, w0: f64) -> Self {
        PotentialConfig {
            s: Coupling::ScaledB(s0),
            w: Coupling::OverA(w0),
            a0: Coupling::Zero,
            a1: Coupling::Zero,
        }
    }

    /// Serializable form of this configuration.
    ///
    /// Only the Morse-family shape plus constant vector potentials is
    /// representable; `Custom` couplings are rejected.
    pub fn to_document(&self) -> Result<PotentialDocument> {
        let s0 = match self.s {
            Coupling::Zero => 0.0,
            Coupling::ScaledB(c) => c,
            _ => {
                return Err(Error::InvalidParams(
                    "scalar coupling is not of the serializable S0 * b form".into(),
                ))
            }
        };
        let w0 = match self.w {
            Coupling::Zero => 0.0,
            Coupling::OverA(c) => c,
            _ => {
                return Err(Error::InvalidParams(
                    "pseudo-scalar coupling is not of the serializable W0 / a form".into(),
                ))
            }
        };
        let a0 = TermSpec::try_from_coupling(&self.a0)?;
        let a1 = TermSpec::try_from_coupling(&self.a1)?;
        Ok(PotentialDocument { s0, w0, a0, a1 })
    }

    /// Reconstructs a configuration from its serializable form.
    pub fn from_document(doc: &PotentialDocument) -> Self {
        PotentialConfig {
            s: Coupling::ScaledB(doc.s0),
            w: Coupling::OverA(doc.w0),
            a0: doc.a0.to_coupling(),
            a1: doc.a1.to_coupling(),
        }
    }
}

/// Serializable shape of a constant-or-zero vector potential component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermSpec {
    Zero,
    Const(f64),
}

impl Default for TermSpec {
    fn default() -> Self {
        TermSpec::Zero
    }
}

impl TermSpec {
    fn to_coupling(self) -> Coupling {
        match self {
            TermSpec::Zero => Coupling::Zero,
            TermSpec::Const(c) => Coupling::Const(c),
        }
    }

    fn try_from_coupling(coupling: &Coupling) -> Result<TermSpec> {
        match coupling {
            Coupling::Zero => Ok(TermSpec::Zero),
            Coupling::Const(c) => Ok(TermSpec::Const(*c)),
            _ => Err(Error::InvalidParams(
                "vector potential component is not zero or constant".into(),
            )),
        }
    }
}

/// JSON document form of a potential configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDocument {
    #[serde(rename = "S0", default)]
    pub s0: f64,
    #[serde(rename = "W0", default)]
    pub w0: f64,
    #[serde(rename = "A0_spec", default)]
    pub a0: TermSpec,
    #[serde(rename = "A1_spec", default)]
    pub a1: TermSpec,
}

/// Coefficient triple of the coupled first-order system at one point,
/// together with its derivatives in the flattening coordinate `y`.
#[derive(Clone, Copy, Debug)]
pub struct CoupledCoeffs {
    /// `A = m + S + a b W`.
    pub a_coef: f64,
    /// `B = (epsilon - A0) + i eta`.
    pub b_coef: Complex64,
    /// `C = a W`.
    pub c_coef: f64,
    /// `dA/dy`.
    pub a_dot: f64,
    /// `dB/dy`.
    pub b_dot: Complex64,
    /// `dC/dy`.
    pub c_dot: f64,
}

/// Evaluates the coupled-system coefficients at `x`.
///
/// The reduction behind the coupled system fixes `alpha = 0`, so profiles
/// with a nonzero mixing parameter are rejected. Derivatives follow the
/// chain rule `d/dy = a d/dx`.
pub fn coupled_coeffs(
    profile: &BackgroundProfile,
    config: &PotentialConfig,
    epsilon: f64,
    x: f64,
) -> Result<CoupledCoeffs> {
    let params = profile.params();
    if params.alpha != 0.0 {
        return Err(Error::InvalidParams(format!(
            "interacting reduction requires alpha = 0, got {}",
            params.alpha
        )));
    }
    let loc = profile.local(x)?;
    let eta = profile.eta();

    let s = config.s.value(x, &loc);
    let sp = config.s.deriv(x, &loc);
    let w = config.w.value(x, &loc);
    let wp = config.w.deriv(x, &loc);
    let a0 = config.a0.value(x, &loc);
    let a0p = config.a0.deriv(x, &loc);

    let a_coef = params.mass + s + loc.a * loc.b * w;
    let b_coef = Complex64::new(epsilon - a0, eta);
    let c_coef = loc.a * w;
    let ab_slope = loc.ap * loc.b + loc.a * loc.bp;
    let a_dot = loc.a * (sp + ab_slope * w + loc.a * loc.b * wp);
    let b_dot = Complex64::new(-loc.a * a0p, 0.0);
    let c_dot = loc.a * (loc.ap * w + loc.a * wp);

    let finite = a_coef.is_finite()
        && b_coef.is_finite()
        && c_coef.is_finite()
        && a_dot.is_finite()
        && b_dot.is_finite()
        && c_dot.is_finite();
    if !finite {
        return Err(Error::InvalidParams(format!(
            "coupling evaluated to a non-finite value at x = {x}"
        )));
    }
    Ok(CoupledCoeffs {
        a_coef,
        b_coef,
        c_coef,
        a_dot,
        b_dot,
        c_dot,
    })
}

/// Coefficient matrix `N` of the coupled system `d chi / dy = -N chi`.
pub fn coupled_matrix(coeffs: &CoupledCoeffs, tau: f64) -> Complex2x2 {
    let ic = Complex64::new(0.0, coeffs.c_coef);
    Complex2x2 {
        m00: Complex64::new(coeffs.a_coef, 0.0),
        m01: (ic - coeffs.b_coef) / tau,
        m10: (coeffs.b_coef + ic) * tau,
        m11: Complex64::new(-coeffs.a_coef, 0.0),
    }
}

/// Gauge phase `p(x)` with `p(0) = 0` and `dp/dx = A1 + (b/a) A0`.
pub fn gauge_phase(profile: &BackgroundProfile, config: &PotentialConfig, x: f64) -> Result<f64> {
    profile.local(x)?;
    let mut p = 0.0;
    match &config.a1 {
        Coupling::Zero => {}
        Coupling::Const(c) => p += c * x,
        other => {
            let term = other.clone();
            p += adaptive_quadrature(
                |t| {
                    let loc = profile.local_unchecked(t);
                    term.value(t, &loc)
                },
                0.0,
                x,
                1e-12,
            )?;
        }
    }
    match &config.a0 {
        Coupling::Zero => {}
        Coupling::Const(c) => p += c * profile.q(x)?,
        other => {
            let term = other.clone();
            p += adaptive_quadrature(
                |t| {
                    let loc = profile.local_unchecked(t);
                    loc.b / loc.a * term.value(t, &loc)
                },
                0.0,
                x,
                1e-12,
            )?;
        }
    }
    Ok(p)
}

/// Lower component from the upper one through kinetic balance,
/// `chi_dn = tau (chi' + A chi) / (B - i C)` with the slope taken in `y`.
pub fn kinetic_balance_down(
    value: Complex64,
    slope: Complex64,
    coeffs: &CoupledCoeffs,
    tau: f64,
    y: f64,
) -> Result<Complex64> {
    let denom = coeffs.b_coef - Complex64::new(0.0, coeffs.c_coef);
    let scale = coeffs.b_coef.norm() + coeffs.c_coef.abs();
    if denom.norm() <= BALANCE_TOL * scale.max(1e-300) {
        return Err(Error::KineticBalanceSingular { y });
    }
    Ok(tau * (slope + coeffs.a_coef * value) / denom)
}

/// Upper component from the lower one through kinetic balance,
/// `chi_up = (-chi' + A chi) / (tau (B + i C))` with the slope taken in `y`.
pub fn kinetic_balance_up(
    value: Complex64,
    slope: Complex64,
    coeffs: &CoupledCoeffs,
    tau: f64,
    y: f64,
) -> Result<Complex64> {
    let denom = coeffs.b_coef + Complex64::new(0.0, coeffs.c_coef);
    let scale = coeffs.b_coef.norm() + coeffs.c_coef.abs();
    if denom.norm() <= BALANCE_TOL * scale.max(1e-300) {
        return Err(Error::KineticBalanceSingular { y });
    }
    Ok((-slope + coeffs.a_coef * value) / (tau * denom))
}

fn check_grid(chi: &[Complex64], coeffs: &[CoupledCoeffs], grid: GridSpec) -> Result<()> {
    if chi.len() != grid.n || coeffs.len() != grid.n {
        return Err(Error::InvalidParams(format!(
            "sample lengths {} / {} do not match the grid size {}",
            chi.len(),
            coeffs.len(),
            grid.n
        )));
    }
    Ok(())
}

fn stencil(chi: &[Complex64], i: usize, h: f64) -> (Complex64, Complex64) {
    let d1 = (-chi[i + 2] + 8.0 * chi[i + 1] - 8.0 * chi[i - 1] + chi[i - 2]) / (12.0 * h);
    let d2 = (-chi[i + 2] + 16.0 * chi[i + 1] - 30.0 * chi[i] + 16.0 * chi[i - 1]
        - chi[i - 2])
        / (12.0 * h * h);
    (d1, d2)
}

/// Maximum absolute residual of the second-order upper-component equation
/// over the interior of a uniform `y` grid.
///
/// Derivatives are formed with fourth-order central stencils, so the result
/// is meaningful only when the grid resolves the solution.
pub fn second_order_residual_up(
    chi: &[Complex64],
    coeffs: &[CoupledCoeffs],
    grid: GridSpec,
) -> Result<f64> {
    check_grid(chi, coeffs, grid)?;
    let h = grid.spacing();
    let mut worst = 0.0f64;
    for i in 2..grid.n - 2 {
        let c = &coeffs[i];
        let denom = c.b_coef - Complex64::new(0.0, c.c_coef);
        let scale = c.b_coef.norm() + c.c_coef.abs();
        if denom.norm() <= BALANCE_TOL * scale.max(1e-300) {
            return Err(Error::KineticBalanceSingular { y: grid.x(i) });
        }
        let (d1, d2) = stencil(chi, i, h);
        let drag = (c.b_dot - Complex64::new(0.0, c.c_dot)) / denom;
        let potential = c.a_dot - c.a_coef * c.a_coef + c.c_coef * c.c_coef;
        let r = d2 - drag * (d1 + c.a_coef * chi[i])
            + (c.b_coef * c.b_coef + potential) * chi[i];
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Maximum absolute residual of the second-order lower-component equation
/// over the interior of a uniform `y` grid.
pub fn second_order_residual_down(
    chi: &[Complex64],
    coeffs: &[CoupledCoeffs],
    grid: GridSpec,
) -> Result<f64> {
    check_grid(chi, coeffs, grid)?;
    let h = grid.spacing();
    let mut worst = 0.0f64;
    for i in 2..grid.n - 2 {
        let c = &coeffs[i];
        let denom = c.b_coef + Complex64::new(0.0, c.c_coef);
        let scale = c.b_coef.norm() + c.c_coef.abs();
        if denom.norm() <= BALANCE_TOL * scale.max(1e-300) {
            return Err(Error::KineticBalanceSingular { y: grid.x(i) });
        }
        let (d1, d2) = stencil(chi, i, h);
        let drag = (c.b_dot + Complex64::new(0.0, c.c_dot)) / denom;
        let potential = -c.a_dot - c.a_coef * c.a_coef + c.c_coef * c.c_coef;
        let r = d2 - drag * (d1 - c.a_coef * chi[i])
            + (c.b_coef * c.b_coef + potential) * chi[i];
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Spinor component selector for the Morse closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Up,
    Down,
}

/// Closed-form data for the Morse family on one branch of the linear-flat
/// background.
#[derive(Clone, Copy, Debug)]
pub struct MorseProblem {
    pub s0: f64,
    pub w0: f64,
    /// Combined strength `V0 = S0 + W0`; the closed form needs `|V0| = eta/2`.
    pub v0: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub mass: f64,
    pub tau: f64,
    pub branch: Branch,
    /// Squared effective mass `(m + sign V0)^2 + eta^2 - W0^2`.
    pub m_eff_sq: f64,
    /// Decay parameter at the effective mass.
    pub omega: f64,
    /// Constant term of the reduced equation, `(M/eta)^2 - (eps/eta)^2 - 2 i eps/eta`.
    pub nu0: Complex64,
    /// Linear-term coefficient for the upper component.
    pub nu1_up: f64,
    /// Linear-term coefficient for the lower component.
    pub nu1_down: f64,
    /// Quadratic-term coefficient `V0 / eta`.
    pub nu2: f64,
    /// Exponent `nu = omega/eta - i eps/omega`, the root of `nu^2 = nu0`
    /// with positive real part.
    pub nu: Complex64,
}

impl MorseProblem {
    /// Maps the flattening coordinate to `z = e^{-sign eta y}` in `(0, 1]`.
    pub fn z_of_y(&self, y: f64) -> Result<f64> {
        let z = (-self.branch.sign() * self.eta * y).exp();
        if z > 1.0 + 1e-9 {
            return Err(Error::InvalidParams(format!(
                "y = {y} lies on the opposite branch"
            )));
        }
        Ok(z.min(1.0))
    }

    /// Inverse map `y = -sign ln(z) / eta`.
    pub fn y_of_z(&self, z: f64) -> f64 {
        -self.branch.sign() * z.ln() / self.eta
    }

    /// Kummer parameters of the chosen component at `z`.
    fn kummer_params(&self, component: Component, z: f64) -> Result<KummerParams> {
        let nu1 = match component {
            Component::Up => self.nu1_up,
            Component::Down => self.nu1_down,
        };
        KummerParams::new(
            self.nu + (0.5 - nu1),
            2.0 * self.nu + 1.0,
            Complex64::new(z, 0.0),
        )
    }

    /// Index `n` when the hypergeometric series terminates, i.e. when
    /// `nu + 1/2 - nu1` is the non-positive integer `-n`.
    pub fn truncation_index(&self, component: Component) -> Option<usize> {
        let nu1 = match component {
            Component::Up => self.nu1_up,
            Component::Down => self.nu1_down,
        };
        let head = self.nu + (0.5 - nu1);
        if head.im.abs() > 1e-10 {
            return None;
        }
        let k = head.re.round();
        if k <= 0.0 && (head.re - k).abs() <= 1e-10 {
            Some((-k) as usize)
        } else {
            None
        }
    }
}

/// Reduces the Morse configuration `S = s0 b`, `W = w0 / a` on a linear-flat
/// profile to its closed-form data on one branch.
///
/// The confluent-hypergeometric reduction exists only when the combined
/// strength satisfies `|s0 + w0| = eta / 2` exactly; other strengths return
/// `ClosedFormUnavailable` and must use the numeric fallback.
pub fn morse_reduce(
    profile: &BackgroundProfile,
    s0: f64,
    w0: f64,
    epsilon: f64,
    branch: Branch,
) -> Result<MorseProblem> {
    let Some((_, _, sign_a1)) = profile.linear_flat_constants() else {
        return Err(Error::UnsupportedFamily {
            expected: "linear-flat",
        });
    };
    if sign_a1 != 1 {
        return Err(Error::UnsupportedFamily {
            expected: "linear-flat with positive outward slope",
        });
    }
    let params = profile.params();
    if params.alpha != 0.0 {
        return Err(Error::InvalidParams(format!(
            "interacting reduction requires alpha = 0, got {}",
            params.alpha
        )));
    }
    if !(s0.is_finite() && w0.is_finite() && epsilon.is_finite()) {
        return Err(Error::InvalidParams(
            "couplings and energy must be finite".into(),
        ));
    }
    let eta = profile.eta();
    let v0 = s0 + w0;
    let ratio = 2.0 * v0.abs() / eta;
    if (ratio - 1.0).abs() > ADMISSIBLE_TOL {
        return Err(Error::ClosedFormUnavailable(format!(
            "closed form needs |S0 + W0| = eta/2 = {}, got |V0| = {}",
            0.5 * eta,
            v0.abs()
        )));
    }
    let s = branch.sign();
    let m = params.mass;
    let m_eff_sq = (m + s * v0).powi(2) + eta * eta - w0 * w0;
    let (omega, _) = decay_core(m_eff_sq, epsilon, eta);
    if omega <= 0.0 {
        return Err(Error::ClosedFormUnavailable(format!(
            "no decaying exponent at epsilon = {epsilon} for effective mass^2 = {m_eff_sq}"
        )));
    }
    let nu2 = v0 / eta;
    let shifted = nu2 + s * m / eta;
    let nu1_up = nu2 * (2.0 * shifted + 1.0);
    let nu1_down = nu2 * (2.0 * shifted - 1.0);
    let nu0 = Complex64::new(
        (m_eff_sq - epsilon * epsilon) / (eta * eta),
        -2.0 * epsilon / eta,
    );
    let nu = Complex64::new(omega / eta, -epsilon / omega);
    Ok(MorseProblem {
        s0,
        w0,
        v0,
        epsilon,
        eta,
        mass: m,
        tau: params.tau,
        branch,
        m_eff_sq,
        omega,
        nu0,
        nu1_up,
        nu1_down,
        nu2,
        nu,
    })
}

struct ChiParts {
    value: Complex64,
    d1: Complex64,
    d2: Complex64,
}

fn chi_parts(mp: &MorseProblem, component: Component, z: f64) -> Result<ChiParts> {
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::InvalidParams(format!(
            "z must lie in (0, 1], got {z}"
        )));
    }
    let p = mp.kummer_params(component, z)?;
    let f = kummer_1f1(&p)?;
    let fp = kummer_derivative(&p)?;
    let f2 = (p.a * f - (p.b - z) * fp) / z;
    let base = (mp.nu * z.ln()).exp() * (-0.5 * z).exp();
    let pf = mp.nu / z - 0.5;
    Ok(ChiParts {
        value: base * f,
        d1: base * (pf * f + fp),
        d2: base * ((pf * pf - mp.nu / (z * z)) * f + 2.0 * pf * fp + f2),
    })
}

/// Closed-form upper component at `z` in `(0, 1]`.
pub fn morse_chi_up(mp: &MorseProblem, z: f64) -> Result<Complex64> {
    Ok(chi_parts(mp, Component::Up, z)?.value)
}

/// Closed-form upper component and its `z`-derivative.
pub fn morse_chi_up_with_slope(mp: &MorseProblem, z: f64) -> Result<(Complex64, Complex64)> {
    let parts = chi_parts(mp, Component::Up, z)?;
    Ok((parts.value, parts.d1))
}

fn down_denominator(mp: &MorseProblem, z: f64) -> Result<Complex64> {
    let denom = Complex64::new(mp.epsilon, mp.eta - mp.w0);
    let scale = mp.epsilon.abs() + mp.eta + mp.w0.abs();
    if denom.norm() <= BALANCE_TOL * scale.max(1e-300) {
        return Err(Error::KineticBalanceSingular { y: mp.y_of_z(z) });
    }
    Ok(denom)
}

fn up_denominator(mp: &MorseProblem, z: f64) -> Result<Complex64> {
    let denom = Complex64::new(mp.epsilon, mp.eta + mp.w0);
    let scale = mp.epsilon.abs() + mp.eta + mp.w0.abs();
    if denom.norm() <= BALANCE_TOL * scale.max(1e-300) {
        return Err(Error::KineticBalanceSingular { y: mp.y_of_z(z) });
    }
    Ok(denom)
}

/// Closed-form spinor pair `(chi_up, chi_dn)` at `z`, the lower component
/// generated from the upper one by the specialized kinetic-balance map
/// `chi_dn = [s tau / (eps + i(eta - W0))] [(s m + V0) - z (eta d/dz + V0)] chi_up`.
pub fn morse_chi_pair(mp: &MorseProblem, z: f64) -> Result<(Complex64, Complex64)> {
    let parts = chi_parts(mp, Component::Up, z)?;
    let s = mp.branch.sign();
    let denom = down_denominator(mp, z)?;
    let c = s * mp.tau / denom;
    let down = c * ((s * mp.mass + mp.v0 - mp.v0 * z) * parts.value - mp.eta * z * parts.d1);
    Ok((parts.value, down))
}

/// Kinetic-balance lower component and its `z`-derivative, derived from the
/// closed-form upper component.
pub fn morse_chi_down_with_slope(mp: &MorseProblem, z: f64) -> Result<(Complex64, Complex64)> {
    let parts = chi_parts(mp, Component::Up, z)?;
    let s = mp.branch.sign();
    let denom = down_denominator(mp, z)?;
    let c = s * mp.tau / denom;
    let head = s * mp.mass + mp.v0;
    let down = c * ((head - mp.v0 * z) * parts.value - mp.eta * z * parts.d1);
    let slope = c
        * (-mp.v0 * parts.value + (head - mp.v0 * z) * parts.d1
            - mp.eta * (parts.d1 + z * parts.d2));
    Ok((down, slope))
}

/// Recovers the upper component from the lower one through the mirrored
/// kinetic-balance map
/// `chi_up = [s / (tau (eps + i(eta + W0)))] [(s m + V0) + z (eta d/dz - V0)] chi_dn`.
pub fn morse_chi_up_from_down(
    mp: &MorseProblem,
    down: Complex64,
    down_slope: Complex64,
    z: f64,
) -> Result<Complex64> {
    let s = mp.branch.sign();
    let denom = up_denominator(mp, z)?;
    let c = s / (mp.tau * denom);
    Ok(c * ((s * mp.mass + mp.v0 - mp.v0 * z) * down + mp.eta * z * down_slope))
}

/// Mirror construction for the other subspace: the lower component solves
/// its own reduced equation (the `nu1` sign flip) and the upper component is
/// generated from it.
pub fn morse_chi_pair_mirror(mp: &MorseProblem, z: f64) -> Result<(Complex64, Complex64)> {
    let parts = chi_parts(mp, Component::Down, z)?;
    let up = morse_chi_up_from_down(mp, parts.value, parts.d1, z)?;
    Ok((up, parts.value))
}

/// Relative residual of the reduced `z`-space equation
/// `z chi'' + chi' + (nu1 - nu2^2 z - nu0 / z) chi = 0`
/// for the chosen component's closed form, with all derivatives analytic.
pub fn morse_ode_residual(mp: &MorseProblem, component: Component, z: f64) -> Result<f64> {
    let parts = chi_parts(mp, component, z)?;
    let nu1 = match component {
        Component::Up => mp.nu1_up,
        Component::Down => mp.nu1_down,
    };
    let t1 = z * parts.d2;
    let t2 = parts.d1;
    let t3 = nu1 * parts.value;
    let t4 = -(mp.nu2 * mp.nu2 * z) * parts.value;
    let t5 = -mp.nu0 / z * parts.value;
    let r = t1 + t2 + t3 + t4 + t5;
    let scale = t1.norm() + t2.norm() + t3.norm() + t4.norm() + t5.norm();
    Ok(r.norm() / scale.max(1e-300))
}

/// Inverse of the flattening map on the canonical linear-flat background.
pub fn linear_x_of_y(profile: &BackgroundProfile, y: f64) -> Result<f64> {
    let Some((_, xi, sign_a1)) = profile.linear_flat_constants() else {
        return Err(Error::UnsupportedFamily {
            expected: "linear-flat",
        });
    };
    if sign_a1 != 1 {
        return Err(Error::UnsupportedFamily {
            expected: "linear-flat with positive outward slope",
        });
    }
    let eta = profile.eta();
    let kappa = profile.params().kappa();
    let s = if y < 0.0 { -1.0 } else { 1.0 };
    let z = (-s * eta * y).exp();
    Ok(s * (1.0 - z) / (xi * kappa))
}

/// Maximum relative gap between the Morse closed form and an independent
/// RK4 integration of the coupled first-order system, seeded with the
/// closed-form pair at `z_min` and integrated inward to the origin.
pub fn closed_vs_rk4_gap(
    profile: &BackgroundProfile,
    mp: &MorseProblem,
    z_min: f64,
    n: usize,
) -> Result<f64> {
    if !(z_min > 0.0 && z_min < 1.0) {
        return Err(Error::InvalidParams(format!(
            "z_min must lie in (0, 1), got {z_min}"
        )));
    }
    let config = PotentialConfig::morse(mp.s0, mp.w0);
    let tau = mp.tau;
    let s = mp.branch.sign();
    let span = -z_min.ln() / mp.eta;
    let grid = GridSpec::new(0.0, span, n)?;
    let (up0, dn0) = morse_chi_pair(mp, z_min)?;
    let matrix_fn = |u: f64| {
        let y = s * (span - u);
        let x = linear_x_of_y(profile, y).expect("linear profile");
        let coeffs = coupled_coeffs(profile, &config, mp.epsilon, x).expect("in-domain point");
        coupled_matrix(&coeffs, tau).scale_re(s)
    };
    let numeric = rk4_coupled(matrix_fn, Spinor2 { up: up0, dn: dn0 }, grid)?;
    let mut worst = 0.0f64;
    for (i, num) in numeric.iter().enumerate() {
        let z = (-mp.eta * (span - grid.x(i))).exp();
        let (up, dn) = morse_chi_pair(mp, z.min(1.0))?;
        let gap = (num.up - up).norm() + (num.dn - dn).norm();
        let scale = up.norm() + dn.norm();
        worst = worst.max(gap / scale.max(1e-300));
    }
    Ok(worst)
}

/// Integrates the coupled system inward from the decaying tail at `|y| = y_far`
/// toward the origin on the chosen branch.
///
/// The seed is the decaying eigenvector of the tail coefficient matrix with
/// unspecified overall scale. Returns `(y, chi)` samples ordered from the
/// tail to the origin.
pub fn integrate_coupled_inward(
    profile: &BackgroundProfile,
    config: &PotentialConfig,
    epsilon: f64,
    branch: Branch,
    y_far: f64,
    n: usize,
) -> Result<Vec<(f64, Spinor2)>> {
    if !(y_far > 0.0 && y_far.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "y_far must be positive, got {y_far}"
        )));
    }
    let params = profile.params();
    let s = branch.sign();
    let x_of = |u: f64| linear_x_of_y(profile, s * (y_far - u));
    let tail = coupled_coeffs(profile, config, epsilon, x_of(0.0)?)?;
    let n_tail = coupled_matrix(&tail, params.tau);
    let lam_sq = Complex64::new(tail.a_coef * tail.a_coef - tail.c_coef * tail.c_coef, 0.0)
        - tail.b_coef * tail.b_coef;
    let lam = lam_sq.sqrt();
    if lam.re <= 0.0 {
        return Err(Error::ClosedFormUnavailable(format!(
            "no decaying tail direction at epsilon = {epsilon}"
        )));
    }
    let v1 = Spinor2 {
        up: n_tail.m01,
        dn: s * lam - n_tail.m00,
    };
    let v2 = Spinor2 {
        up: s * lam + n_tail.m00,
        dn: n_tail.m10,
    };
    let seed = if v1.max_abs() >= v2.max_abs() { v1 } else { v2 };
    if seed.max_abs() == 0.0 {
        return Err(Error::Constraint(
            "tail coefficient matrix has no usable eigenvector".into(),
        ));
    }
    let grid = GridSpec::new(0.0, y_far, n)?;
    let matrix_fn = |u: f64| {
        let x = x_of(u).expect("in-domain point");
        let coeffs = coupled_coeffs(profile, config, epsilon, x).expect("in-domain point");
        coupled_matrix(&coeffs, params.tau).scale_re(s)
    };
    let samples = rk4_coupled(matrix_fn, seed, grid)?;
    Ok(samples
        .into_iter()
        .enumerate()
        .map(|(i, chi)| (s * (y_far - grid.x(i)), chi))
        .collect())
}

/// Assembles the interacting spinor at `(t, x)` from the closed-form data,
/// `Psi = a^{-1} e^{i eps (q - t)} e^{-i p} chi(z)`.
///
/// The point must lie on the branch the problem was reduced on.
pub fn evaluate_interacting_spinor(
    profile: &BackgroundProfile,
    config: &PotentialConfig,
    mp: &MorseProblem,
    t: f64,
    x: f64,
) -> Result<Spinor2> {
    if x * mp.branch.sign() < 0.0 {
        return Err(Error::InvalidParams(format!(
            "x = {x} lies on the opposite branch"
        )));
    }
    let y = profile.y(x)?;
    let z = mp.z_of_y(y)?;
    let (up, dn) = morse_chi_pair(mp, z)?;
    let q = profile.q(x)?;
    let p = gauge_phase(profile, config, x)?;
    let loc = profile.local(x)?;
    let phase = Complex64::new(0.0, mp.epsilon * (q - t) - p).exp() / loc.a;
    Ok(Spinor2 {
        up: phase * up,
        dn: phase * dn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::{self, chi_modes, chi_pair, decay_parameter, FreeSpinor, Subspace};
    use crate::params::ModelParams;

    struct XorShift(u64);

    impl XorShift {
        fn next_f64(&mut self) -> f64 {
            self.0 ^= self.0 << 13;
            self.0 ^= self.0 >> 7;
            self.0 ^= self.0 << 17;
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }

        fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * self.next_f64()
        }
    }

    fn steep_profile(tau: f64) -> BackgroundProfile {
        let params = ModelParams::new(0.0, tau, 0.0, 1.0, 0.8).unwrap();
        BackgroundProfile::linear_flat(&params, 0.3, 0.5, 1).unwrap()
    }

    fn free_coeffs(m: f64, epsilon: f64, eta: f64) -> CoupledCoeffs {
        CoupledCoeffs {
            a_coef: m,
            b_coef: Complex64::new(epsilon, eta),
            c_coef: 0.0,
            a_dot: 0.0,
            b_dot: Complex64::new(0.0, 0.0),
            c_dot: 0.0,
        }
    }

    fn admissible_problem(
        profile: &BackgroundProfile,
        w0: f64,
        epsilon: f64,
        branch: Branch,
    ) -> (MorseProblem, PotentialConfig) {
        let v0 = 0.5 * profile.eta();
        let s0 = v0 - w0;
        let mp = morse_reduce(profile, s0, w0, epsilon, branch).unwrap();
        (mp, PotentialConfig::morse(s0, w0))
    }

    #[test]
    fn free_config_matrix_matches_free_solver() {
        let profile = steep_profile(1.3);
        let config = PotentialConfig::free();
        let epsilon = 0.85;
        let reference = free::coupling_matrix(&profile.params(), epsilon, profile.eta());
        for &x in &[-1.5, -0.4, 0.0, 0.9, 1.8] {
            let coeffs = coupled_coeffs(&profile, &config, epsilon, x).unwrap();
            let gap = (coupled_matrix(&coeffs, profile.params().tau) - reference).max_abs();
            assert!(gap <= 1e-14, "x = {x}: gap = {gap:.3e}");
        }
    }

    #[test]
    fn morse_config_coefficient_structure() {
        let profile = steep_profile(1.0);
        let (s0, w0) = (0.21, -0.07);
        let config = PotentialConfig::morse(s0, w0);
        let epsilon = 1.2;
        let eta = profile.eta();
        for &x in &[-1.6, -0.2, 0.55, 1.9] {
            let loc = profile.local(x).unwrap();
            let c = coupled_coeffs(&profile, &config, epsilon, x).unwrap();
            assert!((c.c_coef - w0).abs() <= 1e-15);
            assert!((c.a_coef - (1.0 + (s0 + w0) * loc.b)).abs() <= 1e-14);
            assert_eq!(c.b_coef, Complex64::new(epsilon, eta));
            assert_eq!(c.b_dot, Complex64::new(0.0, 0.0));
            assert!(c.c_dot.abs() <= 1e-15, "c_dot = {:.3e}", c.c_dot);
            let expected_a_dot = (s0 + w0) * loc.a * loc.bp;
            assert!((c.a_dot - expected_a_dot).abs() <= 1e-13);
        }
    }

    #[test]
    fn coefficient_derivatives_match_finite_differences() {
        let profile = steep_profile(1.0);
        let config = PotentialConfig {
            s: Coupling::ScaledB(0.3),
            w: Coupling::Custom {
                value: Arc::new(|x: f64| 0.2 * (0.8 * x).sin()),
                deriv: Arc::new(|x: f64| 0.16 * (0.8 * x).cos()),
            },
            a0: Coupling::Custom {
                value: Arc::new(|x: f64| 0.1 * x * x),
                deriv: Arc::new(|x: f64| 0.2 * x),
            },
            a1: Coupling::Zero,
        };
        let epsilon = 0.7;
        let h = 1e-5;
        for &x in &[-1.1, 0.35, 1.4] {
            let loc = profile.local(x).unwrap();
            let c = coupled_coeffs(&profile, &config, epsilon, x).unwrap();
            let hi = coupled_coeffs(&profile, &config, epsilon, x + h).unwrap();
            let lo = coupled_coeffs(&profile, &config, epsilon, x - h).unwrap();
            let fd_a = loc.a * (hi.a_coef - lo.a_coef) / (2.0 * h);
            let fd_b = (hi.b_coef - lo.b_coef) / (2.0 * h) * loc.a;
            let fd_c = loc.a * (hi.c_coef - lo.c_coef) / (2.0 * h);
            assert!((c.a_dot - fd_a).abs() <= 1e-8 * (1.0 + c.a_dot.abs()));
            assert!((c.b_dot - fd_b).norm() <= 1e-8 * (1.0 + c.b_dot.norm()));
            assert!((c.c_dot - fd_c).abs() <= 1e-8 * (1.0 + c.c_dot.abs()));
        }
    }

    #[test]
    fn gauge_phase_vanishes_without_vector_potential() {
        let profile = steep_profile(1.0);
        assert_eq!(
            gauge_phase(&profile, &PotentialConfig::free(), 1.3).unwrap(),
            0.0
        );
        assert_eq!(
            gauge_phase(&profile, &PotentialConfig::morse(0.1, 0.05), -0.8).unwrap(),
            0.0
        );
    }

    #[test]
    fn gauge_phase_constant_a1_is_linear() {
        let profile = steep_profile(1.0);
        let mut config = PotentialConfig::free();
        config.a1 = Coupling::Const(0.4);
        for &x in &[-1.7, 0.6, 2.1] {
            let p = gauge_phase(&profile, &config, x).unwrap();
            assert!((p - 0.4 * x).abs() <= 1e-15);
        }
    }

    #[test]
    fn gauge_phase_constant_a0_agrees_with_quadrature() {
        let profile = steep_profile(1.0);
        let mut closed = PotentialConfig::free();
        closed.a0 = Coupling::Const(0.7);
        let mut numeric = PotentialConfig::free();
        numeric.a0 = Coupling::Custom {
            value: Arc::new(|_| 0.7),
            deriv: Arc::new(|_| 0.0),
        };
        for &x in &[-1.2, 1.6] {
            let p1 = gauge_phase(&profile, &closed, x).unwrap();
            let p2 = gauge_phase(&profile, &numeric, x).unwrap();
            assert!(
                (p1 - p2).abs() <= 1e-9 * (1.0 + p1.abs()),
                "x = {x}: {p1} vs {p2}"
            );
        }
    }

    #[test]
    fn second_order_residual_vanishes_on_free_closed_form() {
        let (m, eta, tau, epsilon) = (1.0, 0.26832815729997476, 1.0, 1.1);
        let dd = decay_parameter(epsilon, m, eta).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let grid = GridSpec::new(0.0, 2.5, 501).unwrap();
        let coeffs = vec![free_coeffs(m, epsilon, eta); grid.n];
        let mut up = Vec::with_capacity(grid.n);
        let mut dn = Vec::with_capacity(grid.n);
        for i in 0..grid.n {
            let (u, d) =
                chi_pair(&dd, m, eta, tau, one, zero, grid.x(i), Subspace::PositiveEnergy)
                    .unwrap();
            up.push(u);
            dn.push(d);
        }
        let r_up = second_order_residual_up(&up, &coeffs, grid).unwrap();
        let r_dn = second_order_residual_down(&dn, &coeffs, grid).unwrap();
        assert!(r_up <= 1e-10, "upper residual {r_up:.3e}");
        assert!(r_dn <= 1e-10, "lower residual {r_dn:.3e}");
    }

    #[test]
    fn second_order_residual_rejects_bad_grids() {
        assert!(GridSpec::new(0.0, 1.0, 4).is_err());
        let coeffs = vec![free_coeffs(1.0, 0.5, 0.2); 4];
        let chi = vec![Complex64::new(1.0, 0.0); 4];
        let grid = GridSpec::new(0.0, 1.0, 9).unwrap();
        assert!(matches!(
            second_order_residual_up(&chi, &coeffs, grid),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn kinetic_balance_reproduces_free_component_ratio() {
        let (m, eta, tau, epsilon) = (1.0, 0.26832815729997476, 1.4, 0.9);
        let dd = decay_parameter(epsilon, m, eta).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let modes =
            chi_modes(&dd, m, eta, tau, one, zero, 1.0, Subspace::PositiveEnergy).unwrap();
        let mode = modes[0];
        let coeffs = free_coeffs(m, epsilon, eta);
        for &y in &[0.0, 0.7, 1.9] {
            let e = (mode.rate * y).exp();
            let (u, d) = (mode.up * e, mode.dn * e);
            let down = kinetic_balance_down(u, mode.rate * u, &coeffs, tau, y).unwrap();
            assert!((down - d).norm() <= 1e-12 * d.norm());
            let up = kinetic_balance_up(d, mode.rate * d, &coeffs, tau, y).unwrap();
            assert!((up - u).norm() <= 1e-12 * u.norm());
        }
    }

    #[test]
    fn kinetic_balance_detects_singular_denominator() {
        let mut coeffs = free_coeffs(1.0, 0.0, 0.3);
        coeffs.c_coef = 0.3;
        let v = Complex64::new(1.0, 0.0);
        assert!(matches!(
            kinetic_balance_down(v, v, &coeffs, 1.0, 0.5),
            Err(Error::KineticBalanceSingular { .. })
        ));
        coeffs.c_coef = -0.3;
        assert!(matches!(
            kinetic_balance_up(v, v, &coeffs, 1.0, 0.5),
            Err(Error::KineticBalanceSingular { .. })
        ));
    }

    #[test]
    fn morse_reduce_rejects_unsupported_inputs() {
        let profile = steep_profile(1.0);
        let eta = profile.eta();
        assert!(matches!(
            morse_reduce(&profile, 0.3 * eta, 0.0, 0.8, Branch::Pos),
            Err(Error::ClosedFormUnavailable(_))
        ));
        let params = ModelParams::new(0.0, 1.0, 0.0, 1.0, 0.8).unwrap();
        let vee = BackgroundProfile::linear_flat(&params, 0.3, 0.5, -1).unwrap();
        assert!(matches!(
            morse_reduce(&vee, 0.5 * vee.eta(), 0.0, 0.8, Branch::Pos),
            Err(Error::UnsupportedFamily { .. })
        ));
        let mixed = ModelParams::new(0.5, 0.8, 0.0, 1.0, 0.8).unwrap();
        let tilted = BackgroundProfile::linear_flat(&mixed, 0.3, 0.5, 1).unwrap();
        assert!(matches!(
            morse_reduce(&tilted, 0.5 * tilted.eta(), 0.0, 0.8, Branch::Pos),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn morse_reduce_produces_consistent_reduction_data() {
        let profile = steep_profile(1.0);
        let eta = profile.eta();
        let (mp, _) = admissible_problem(&profile, 0.1, 0.8, Branch::Pos);
        assert!((mp.nu2 - 0.5).abs() <= 1e-14);
        let expected_m2 = (1.0 + mp.v0).powi(2) + eta * eta - 0.01;
        assert!((mp.m_eff_sq - expected_m2).abs() <= 1e-15 * expected_m2.abs());
        assert!((mp.nu * mp.nu - mp.nu0).norm() <= 1e-12 * mp.nu0.norm());
        assert!(mp.nu.re > 0.0);
        assert!((mp.nu1_up - mp.nu1_down - 1.0).abs() <= 1e-14);
        assert_eq!(mp.z_of_y(0.0).unwrap(), 1.0);
        let z = mp.z_of_y(1.7).unwrap();
        assert!(z < 1.0 && z > 0.0);
        assert!((mp.y_of_z(z) - 1.7).abs() <= 1e-12);
        assert!(mp.z_of_y(-2.0).is_err());

        let (mn, _) = admissible_problem(&profile, 0.1, 0.8, Branch::Neg);
        let expected_neg = (1.0 - mn.v0).powi(2) + eta * eta - 0.01;
        assert!((mn.m_eff_sq - expected_neg).abs() <= 1e-15 * expected_neg.abs());
        assert!(mn.z_of_y(-1.3).unwrap() < 1.0);
    }

    #[test]
    fn nu_exponent_squares_to_nu0_for_random_admissible_configs() {
        let profile = steep_profile(1.0);
        let eta = profile.eta();
        let mut rng = XorShift(0xabcdef12345678);
        for i in 0..10 {
            let w0 = rng.in_range(-0.6, 0.8);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let v0 = sign * 0.5 * eta;
            let s0 = v0 - w0;
            let eps_mag = rng.in_range(0.1, 2.2);
            let epsilon = if i % 3 == 0 { -eps_mag } else { eps_mag };
            let branch = if i % 4 < 2 { Branch::Pos } else { Branch::Neg };
            let mp = morse_reduce(&profile, s0, w0, epsilon, branch).unwrap();
            let gap = (mp.nu * mp.nu - mp.nu0).norm();
            assert!(
                gap <= 1e-12 * mp.nu0.norm().max(1.0),
                "config {i}: gap = {gap:.3e}"
            );
            assert!(mp.nu.re > 0.0);
            assert!((mp.nu2 * mp.nu2 - 0.25).abs() <= 1e-14);
        }
    }

    #[test]
    fn truncation_index_detects_polynomial_case() {
        let profile = steep_profile(1.0);
        let eta = profile.eta();
        let w0 = (2.0 * eta + eta * eta).sqrt();
        let v0 = 0.5 * eta;
        let mp = morse_reduce(&profile, v0 - w0, w0, 0.0, Branch::Pos).unwrap();
        assert!((mp.omega - (1.0 - 0.5 * eta)).abs() <= 1e-12);
        assert_eq!(mp.truncation_index(Component::Up), Some(1));
        assert_eq!(mp.truncation_index(Component::Down), Some(0));

        let (generic, _) = admissible_problem(&profile, 0.1, 0.8, Branch::Pos);
        assert_eq!(generic.truncation_index(Component::Up), None);
    }

    #[test]
    fn chi_up_origin_value_and_small_z_envelope() {
        let profile = steep_profile(1.0);
        let (mp, _) = admissible_problem(&profile, 0.15, 0.9, Branch::Pos);
        let chi1 = morse_chi_up(&mp, 1.0).unwrap();
        let p = KummerParams::new(
            mp.nu + (0.5 - mp.nu1_up),
            2.0 * mp.nu + 1.0,
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let direct = (-0.5f64).exp() * kummer_1f1(&p).unwrap();
        assert!((chi1 - direct).norm() <= 1e-14 * direct.norm());

        let decay = mp.omega / mp.eta;
        for &z in &[1e-3, 1e-2, 0.1, 0.5, 1.0] {
            let ratio = morse_chi_up(&mp, z).unwrap().norm() / z.powf(decay);
            assert!(
                (0.05..=20.0).contains(&ratio),
                "z = {z}: envelope ratio {ratio:.3e}"
            );
        }
    }

    #[test]
    fn reduced_equation_residual_is_small_for_both_components() {
        let profile = steep_profile(1.0);
        let cases = [
            admissible_problem(&profile, 0.15, 0.9, Branch::Pos).0,
            admissible_problem(&profile, 0.4, -0.7, Branch::Neg).0,
        ];
        for mp in &cases {
            for &z in &[1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 0.6, 1.0] {
                let r_up = morse_ode_residual(mp, Component::Up, z).unwrap();
                let r_dn = morse_ode_residual(mp, Component::Down, z).unwrap();
                assert!(r_up <= 1e-10, "up residual {r_up:.3e} at z = {z}");
                assert!(r_dn <= 1e-10, "down residual {r_dn:.3e} at z = {z}");
            }
        }
    }

    #[test]
    fn two_path_kinetic_balance_agrees() {
        let profile = steep_profile(1.0);
        for (w0, epsilon, branch) in [
            (0.15, 0.9, Branch::Pos),
            (0.3, -1.1, Branch::Neg),
        ] {
            let (mp, config) = admissible_problem(&profile, w0, epsilon, branch);
            let s = branch.sign();
            for &z in &[0.1, 0.35, 0.7, 1.0] {
                let y = mp.y_of_z(z);
                let x = linear_x_of_y(&profile, y).unwrap();
                let coeffs = coupled_coeffs(&profile, &config, epsilon, x).unwrap();
                let (up, dup_dz) = morse_chi_up_with_slope(&mp, z).unwrap();
                let slope_y = -s * mp.eta * z * dup_dz;
                let generic =
                    kinetic_balance_down(up, slope_y, &coeffs, mp.tau, y).unwrap();
                let closed = morse_chi_pair(&mp, z).unwrap().1;
                assert!(
                    (generic - closed).norm() <= 1e-10 * (1.0 + closed.norm()),
                    "z = {z}: {generic} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn down_up_roundtrip_recovers_upper_component() {
        let profile = steep_profile(1.0);
        let (mp, _) = admissible_problem(&profile, 0.2, 1.3, Branch::Pos);
        for &z in &[0.08, 0.4, 0.85, 1.0] {
            let expected = morse_chi_up(&mp, z).unwrap();
            let (down, down_slope) = morse_chi_down_with_slope(&mp, z).unwrap();
            let recovered = morse_chi_up_from_down(&mp, down, down_slope, z).unwrap();
            assert!(
                (recovered - expected).norm() <= 1e-10 * (1.0 + expected.norm()),
                "z = {z}"
            );
        }
    }

    #[test]
    fn mirror_pair_satisfies_coupled_system() {
        let profile = steep_profile(1.0);
        let (mp, config) = admissible_problem(&profile, 0.25, 0.7, Branch::Pos);
        let y_max = mp.y_of_z(0.3);
        let grid = GridSpec::new(0.0, y_max, 1201).unwrap();
        let mut ups = Vec::with_capacity(grid.n);
        let mut downs = Vec::with_capacity(grid.n);
        let mut coeffs = Vec::with_capacity(grid.n);
        for i in 0..grid.n {
            let y = grid.x(i);
            let z = mp.z_of_y(y).unwrap();
            let (up, down) = morse_chi_pair_mirror(&mp, z).unwrap();
            ups.push(up);
            downs.push(down);
            let x = linear_x_of_y(&profile, y).unwrap();
            coeffs.push(coupled_coeffs(&profile, &config, mp.epsilon, x).unwrap());
        }
        let h = grid.spacing();
        let mut worst = 0.0f64;
        for i in 2..grid.n - 2 {
            let n = coupled_matrix(&coeffs[i], mp.tau);
            let (du, _) = stencil(&ups, i, h);
            let (dd, _) = stencil(&downs, i, h);
            let v = Spinor2 { up: ups[i], dn: downs[i] };
            let nv = n.apply(&v);
            let r = (du + nv.up).norm().max((dd + nv.dn).norm());
            worst = worst.max(r);
        }
        assert!(worst <= 1e-9, "coupled-system residual {worst:.3e}");

        let r_dn = second_order_residual_down(&downs, &coeffs, grid).unwrap();
        assert!(r_dn <= 1e-9, "mirror lower-component residual {r_dn:.3e}");
    }

    #[test]
    fn second_order_residual_small_on_morse_closed_form() {
        let profile = steep_profile(1.0);
        let (mp, config) = admissible_problem(&profile, 0.15, 0.9, Branch::Pos);
        let y_max = mp.y_of_z(0.3);
        let grid = GridSpec::new(0.0, y_max, 1201).unwrap();
        let mut ups = Vec::with_capacity(grid.n);
        let mut coeffs = Vec::with_capacity(grid.n);
        for i in 0..grid.n {
            let z = mp.z_of_y(grid.x(i)).unwrap();
            ups.push(morse_chi_up(&mp, z).unwrap());
            let x = linear_x_of_y(&profile, grid.x(i)).unwrap();
            coeffs.push(coupled_coeffs(&profile, &config, mp.epsilon, x).unwrap());
        }
        let r = second_order_residual_up(&ups, &coeffs, grid).unwrap();
        assert!(r <= 1e-9, "residual {r:.3e}");
    }

    #[test]
    fn rk4_oracle_matches_closed_pair_for_admissible_configs() {
        let profile = steep_profile(1.0);
        let eta = profile.eta();
        let cases = [
            (Branch::Pos, 0.8, 0.0, 1.0),
            (Branch::Pos, 1.5, 0.25 * eta, 1.0),
            (Branch::Neg, 0.6, 0.5 * eta, 1.0),
            (Branch::Pos, -0.9, 0.1, -1.0),
            (Branch::Neg, -1.3, 0.3 * eta, -1.0),
            (Branch::Pos, 2.2, 0.45 * eta, 1.0),
        ];
        for &(branch, epsilon, w0, sign) in &cases {
            let v0 = sign * 0.5 * eta;
            let mp = morse_reduce(&profile, v0 - w0, w0, epsilon, branch).unwrap();
            let gap = closed_vs_rk4_gap(&profile, &mp, 0.05, 4001).unwrap();
            assert!(
                gap <= 1e-6,
                "branch {branch:?}, eps = {epsilon}, w0 = {w0}: gap = {gap:.3e}"
            );
        }
    }

    #[test]
    fn numeric_fallback_reproduces_free_solution() {
        let profile = steep_profile(1.0);
        let eta = profile.eta();
        let epsilon = 1.1;
        let config = PotentialConfig::free();
        let dd = decay_parameter(epsilon, 1.0, eta).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);

        let y_far = 3.0 / dd.omega;
        let samples =
            integrate_coupled_inward(&profile, &config, epsilon, Branch::Pos, y_far, 2001)
                .unwrap();
        let modes =
            chi_modes(&dd, 1.0, eta, 1.0, one, zero, 1.0, Subspace::PositiveEnergy).unwrap();
        let mode = modes[0];
        let closed_at = |y: f64| {
            let e = (mode.rate * y).exp();
            (mode.up * e, mode.dn * e)
        };
        let ratio = closed_at(samples[0].0).0 / samples[0].1.up;
        for &(y, chi) in &samples {
            let (cu, cd) = closed_at(y);
            let gap = (ratio * chi.up - cu).norm() + (ratio * chi.dn - cd).norm();
            let scale = cu.norm() + cd.norm();
            assert!(gap <= 1e-8 * scale, "y = {y:.3}: gap = {gap:.3e}");
        }

        let fs = FreeSpinor::from_constants(
            epsilon,
            eta,
            one,
            zero,
            zero,
            zero,
            Subspace::PositiveEnergy,
        );
        let t = 0.37;
        for &idx in &[0usize, 700, 1400, 2000] {
            let (y, chi) = samples[idx];
            let x = linear_x_of_y(&profile, y).unwrap();
            let loc = profile.local(x).unwrap();
            let q = profile.q(x).unwrap();
            let phase = Complex64::new(0.0, epsilon * (q - t)).exp() / loc.a;
            let numeric = Spinor2 {
                up: ratio * chi.up * phase,
                dn: ratio * chi.dn * phase,
            };
            let reference = free::evaluate_spinor(&profile, &fs, t, x).unwrap();
            let gap = (numeric - reference).max_abs();
            assert!(
                gap <= 1e-8 * reference.max_abs(),
                "x = {x:.3}: gap = {gap:.3e}"
            );
        }

        let neg =
            integrate_coupled_inward(&profile, &config, epsilon, Branch::Neg, y_far, 1501)
                .unwrap();
        let neg_modes =
            chi_modes(&dd, 1.0, eta, 1.0, zero, one, -1.0, Subspace::PositiveEnergy).unwrap();
        let mode_b = neg_modes[1];
        let closed_neg = |y: f64| {
            let e = (mode_b.rate * y).exp();
            (mode_b.up * e, mode_b.dn * e)
        };
        let ratio_neg = closed_neg(neg[0].0).0 / neg[0].1.up;
        for &(y, chi) in &neg {
            let (cu, cd) = closed_neg(y);
            let gap = (ratio_neg * chi.up - cu).norm() + (ratio_neg * chi.dn - cd).norm();
            assert!(gap <= 1e-8 * (cu.norm() + cd.norm()), "y = {y:.3}");
        }
    }

    #[test]
    fn evaluated_spinor_is_gauge_invariant_up_to_phase() {
        let profile = steep_profile(1.0);
        let (mp, plain) = admissible_problem(&profile, 0.15, 0.9, Branch::Pos);
        let mut gauged = plain.clone();
        gauged.a1 = Coupling::Custom {
            value: Arc::new(|x: f64| 0.6 * (2.0 * x).cos()),
            deriv: Arc::new(|x: f64| -1.2 * (2.0 * x).sin()),
        };
        for &(t, x) in &[(0.0, 0.9), (0.4, 1.6)] {
            let psi1 = evaluate_interacting_spinor(&profile, &plain, &mp, t, x).unwrap();
            let psi2 = evaluate_interacting_spinor(&profile, &gauged, &mp, t, x).unwrap();
            assert!((psi1.up.norm() - psi2.up.norm()).abs() <= 1e-12 * psi1.up.norm());
            assert!((psi1.dn.norm() - psi2.dn.norm()).abs() <= 1e-12 * psi1.dn.norm());
            let lambda = 0.3 * (2.0 * x).sin();
            let rotated = psi1.scale(Complex64::new(0.0, -lambda).exp());
            assert!(
                (psi2 - rotated).max_abs() <= 1e-9 * psi1.max_abs(),
                "(t, x) = ({t}, {x})"
            );
        }
    }

    #[test]
    fn evaluated_density_vanishes_at_the_boundary() {
        let profile = steep_profile(1.0);
        let (mp, config) = admissible_problem(&profile, 0.1, 0.9, Branch::Pos);
        let (_, x_plus) = profile.boundaries();
        let interior = evaluate_interacting_spinor(&profile, &config, &mp, 0.0, 0.8).unwrap();
        assert!(profile.g00(0.8) * interior.norm_sq() > 1e-6);
        let xb = x_plus * (1.0 - 1e-12);
        let edge = evaluate_interacting_spinor(&profile, &config, &mp, 0.0, xb).unwrap();
        assert!(profile.g00(xb) * edge.norm_sq() <= 1e-10);
        assert!(matches!(
            evaluate_interacting_spinor(&profile, &config, &mp, 0.0, -0.5),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn potential_document_roundtrips_and_rejects_unknown_keys() {
        let doc = PotentialDocument {
            s0: 0.2,
            w0: -0.1,
            a0: TermSpec::Const(0.3),
            a1: TermSpec::Zero,
        };
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.contains("\"S0\"") && text.contains("\"A0_spec\""));
        let back: PotentialDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);

        let config = PotentialConfig::from_document(&doc);
        assert_eq!(config.to_document().unwrap(), doc);

        assert!(serde_json::from_str::<PotentialDocument>(r#"{"S0":1.0,"bogus":2}"#).is_err());

        let custom = PotentialConfig {
            s: Coupling::Zero,
            w: Coupling::Zero,
            a0: Coupling::Zero,
            a1: Coupling::Custom {
                value: Arc::new(|_| 0.0),
                deriv: Arc::new(|_| 0.0),
            },
        };
        assert!(custom.to_document().is_err());
    }

    #[test]
    fn linear_x_of_y_inverts_the_flattening_map() {
        let profile = steep_profile(1.0);
        for &x in &[-2.0, -0.9, 0.0, 0.4, 1.7] {
            let y = profile.y(x).unwrap();
            let back = linear_x_of_y(&profile, y).unwrap();
            assert!((back - x).abs() <= 1e-12 * (1.0 + x.abs()), "x = {x}");
        }
    }
}
