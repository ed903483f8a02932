//! Independent numerical oracles: fixed-step RK4 integration, adaptive
//! Gauss-Kronrod quadrature, finite-difference stencils, and bisection.
//!
//! These routines deliberately share no code with the closed-form evaluators
//! they are used to check. The composite checks at the bottom
//! ([`dirac_residual`], [`dirac_square_vs_kg`]) apply the first-order wave
//! operator directly to a sampled wavefunction and compare against the
//! second-order curved-space wave operator built from the metric and the
//! connection contractions.

use crate::background::BackgroundProfile;
use crate::complex2::{Complex2x2, Spinor2};
use crate::error::{Error, Result};
use crate::gamma;
use num_complex::Complex64;

/// Uniform evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridSpec {
    /// Requires `lo < hi` and at least 8 points.
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::Config(format!("grid bounds [{lo}, {hi}] invalid")));
        }
        if n < 8 {
            return Err(Error::Config(format!("grid needs >= 8 points, got {n}")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + self.spacing() * i as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.x(i))
    }
}

/// Classical fixed-step RK4 for the linear system `chi'(t) = F(t) chi(t)`.
///
/// Returns the solution sampled at every grid point, starting from `initial`
/// at `grid.lo`. Fails with [`Error::BlowUp`] if the state stops being
/// finite.
pub fn rk4_coupled(
    matrix_fn: impl Fn(f64) -> Complex2x2,
    initial: Spinor2,
    grid: GridSpec,
) -> Result<Vec<Spinor2>> {
    let h = grid.spacing();
    let mut out = Vec::with_capacity(grid.n);
    let mut chi = initial;
    out.push(chi);
    for i in 0..grid.n - 1 {
        let t = grid.x(i);
        let f1 = matrix_fn(t);
        let f2 = matrix_fn(t + 0.5 * h);
        let f4 = matrix_fn(t + h);
        let k1 = f1.apply(&chi);
        let k2 = f2.apply(&(chi + k1.scale(Complex64::new(0.5 * h, 0.0))));
        let k3 = f2.apply(&(chi + k2.scale(Complex64::new(0.5 * h, 0.0))));
        let k4 = f4.apply(&(chi + k3.scale(Complex64::new(h, 0.0))));
        let incr = k1 + k2.scale(Complex64::new(2.0, 0.0)) + k3.scale(Complex64::new(2.0, 0.0)) + k4;
        chi = chi + incr.scale(Complex64::new(h / 6.0, 0.0));
        if !chi.is_finite() {
            return Err(Error::BlowUp { t: t + h });
        }
        out.push(chi);
    }
    Ok(out)
}

/// Fixed-step RK4 for the scalar linear equation `u''(x) = f(x) u(x)`.
///
/// Returns `(u, u')` at every grid point.
pub fn rk4_linear_second_order(
    f: impl Fn(f64) -> f64,
    u0: f64,
    up0: f64,
    grid: GridSpec,
) -> Result<Vec<(f64, f64)>> {
    let h = grid.spacing();
    let mut out = Vec::with_capacity(grid.n);
    let mut u = u0;
    let mut up = up0;
    out.push((u, up));
    let deriv = |x: f64, u: f64, up: f64| (up, f(x) * u);
    for i in 0..grid.n - 1 {
        let x = grid.x(i);
        let (k1u, k1p) = deriv(x, u, up);
        let (k2u, k2p) = deriv(x + 0.5 * h, u + 0.5 * h * k1u, up + 0.5 * h * k1p);
        let (k3u, k3p) = deriv(x + 0.5 * h, u + 0.5 * h * k2u, up + 0.5 * h * k2p);
        let (k4u, k4p) = deriv(x + h, u + h * k3u, up + h * k3p);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        up += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if !(u.is_finite() && up.is_finite()) {
            return Err(Error::BlowUp { t: x + h });
        }
        out.push((u, up));
    }
    Ok(out)
}

// 15-point Kronrod nodes (positive half) with the embedded 7-point Gauss rule.
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss-Kronrod 7/15 panel; returns the Kronrod estimate and the
/// absolute difference to the embedded Gauss estimate.
fn gk15_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK15[7] * fc;
    let mut gauss = WG7[3] * fc;
    for (j, &x) in XGK15.iter().enumerate().take(7) {
        let dx = half * x;
        let fsum = f(center - dx) + f(center + dx);
        kronrod += WGK15[j] * fsum;
        if j % 2 == 1 {
            gauss += WG7[j / 2] * fsum;
        }
    }
    kronrod *= half;
    gauss *= half;
    (kronrod, (kronrod - gauss).abs())
}

/// Adaptive quadrature of `f` over `[lo, hi]` to absolute tolerance `tol`.
///
/// Gauss-Kronrod 7/15 panels refined worst-first against the global
/// tolerance; `lo > hi` integrates with the conventional sign flip. A split
/// that neither shrinks the error estimate nor moves the value marks a
/// region as roundoff-limited and stops refining it, so a noisy integrand
/// degrades to the machine-achievable accuracy instead of failing; hard
/// errors are reserved for non-finite values and unresolvable singularities.
pub fn adaptive_quadrature(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    if lo > hi {
        return Ok(-adaptive_quadrature(f, hi, lo, tol)?);
    }
    let tol = tol.max(1e-15);
    const MAX_PANELS: usize = 1 << 14;
    struct Panel {
        a: f64,
        b: f64,
        result: f64,
        err: f64,
        frozen: bool,
    }
    let panel = |a: f64, b: f64| -> Result<Panel> {
        let (result, err) = gk15_panel(&f, a, b);
        if !result.is_finite() {
            return Err(Error::Accuracy(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        Ok(Panel {
            a,
            b,
            result,
            err,
            frozen: false,
        })
    };
    let mut panels = vec![panel(lo, hi)?];
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= tol {
            return Ok(panels.iter().map(|p| p.result).sum());
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.frozen)
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i);
        let Some(worst) = worst else {
            return Ok(panels.iter().map(|p| p.result).sum());
        };
        let (a, b, parent_result, parent_err) = {
            let p = &panels[worst];
            (p.a, p.b, p.result, p.err)
        };
        let mid = 0.5 * (a + b);
        if !(a < mid && mid < b) || panels.len() >= MAX_PANELS {
            return Err(Error::Accuracy(format!(
                "refinement exhausted on [{a}, {b}], err = {parent_err:.3e}"
            )));
        }
        let mut left = panel(a, mid)?;
        let mut right = panel(mid, b)?;
        let stalled = left.err + right.err >= 0.99 * parent_err
            && (left.result + right.result - parent_result).abs()
                <= 1e-5 * parent_result.abs();
        if stalled {
            left.frozen = true;
            right.frozen = true;
        }
        panels[worst] = left;
        panels.push(right);
    }
}

/// Tanh-sinh quadrature of `f` over `[lo, hi]`, for integrands with
/// integrable endpoint singularities.
///
/// The double-exponential substitution pushes the endpoints to infinity, so
/// an algebraic or logarithmic singularity at `lo` or `hi` is never sampled
/// and the trapezoid sum still converges rapidly. Levels double until two
/// successive estimates agree to `tol`.
///
/// Abscissas are formed as an offset from the nearer endpoint, so when the
/// singular endpoint is exactly zero the integrand sees the true distance at
/// full precision. At a nonzero endpoint the offset is quantized to one ulp
/// of the endpoint value, which truncates the mass closer than that (about
/// 1e-8 of the total for an inverse-square-root singularity at unit scale);
/// place the singular endpoint at zero when full accuracy is required.
pub fn de_quadrature(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if lo == hi {
        return Ok(0.0);
    }
    if lo > hi {
        return Ok(-de_quadrature(f, hi, lo, tol)?);
    }
    let radius = 0.5 * (hi - lo);
    let tol = tol.max(1e-15);
    const TMAX: f64 = 4.0;
    let eval = |t: f64| -> f64 {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        // Distance to the nearer endpoint, radius * (1 - |tanh u|), in a
        // form that stays accurate long after tanh saturates to 1.
        let dist = radius * 2.0 / ((2.0 * u.abs()).exp() + 1.0);
        if dist == 0.0 {
            return 0.0;
        }
        let x = if t >= 0.0 { hi - dist } else { lo + dist };
        if x <= lo || x >= hi {
            return 0.0;
        }
        let w = radius * std::f64::consts::FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= TMAX {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h;
    for _ in 0..12 {
        h *= 0.5;
        let mut t = h;
        while t <= TMAX {
            sum += eval(t) + eval(-t);
            t += 2.0 * h;
        }
        let cur = sum * h;
        if (cur - prev).abs() <= tol.max(1e-15 * cur.abs()) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Accuracy(format!(
        "tanh-sinh levels exhausted on [{lo}, {hi}]"
    )))
}

/// Root of `f` on `[lo, hi]` by bisection; requires a sign change.
pub fn bisect_root(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::BoundaryNotFound(format!(
            "no sign change of target function on [{lo}, {hi}]"
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Central first difference of a spinor-valued function.
pub fn cd1_spinor(f: &impl Fn(f64) -> Spinor2, x: f64, h: f64) -> Spinor2 {
    (f(x + h) - f(x - h)).scale(Complex64::new(0.5 / h, 0.0))
}

/// Central second difference of a spinor-valued function.
pub fn cd2_spinor(f: &impl Fn(f64) -> Spinor2, x: f64, h: f64) -> Spinor2 {
    let s = f(x + h) + f(x - h);
    let c = f(x).scale(Complex64::new(2.0, 0.0));
    (s - c).scale(Complex64::new(1.0 / (h * h), 0.0))
}

/// Central first difference of a matrix-valued function.
pub fn cd1_matrix(f: &impl Fn(f64) -> Complex2x2, x: f64, h: f64) -> Complex2x2 {
    (f(x + h) - f(x - h)).scale_re(0.5 / h)
}

/// Central first difference of a complex-valued function.
pub fn cd1_complex(f: &impl Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
    (f(x + h) - f(x - h)) * Complex64::new(0.5 / h, 0.0)
}

/// Central second difference of a complex-valued function.
pub fn cd2_complex(f: &impl Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
    (f(x + h) + f(x - h) - 2.0 * f(x)) * Complex64::new(1.0 / (h * h), 0.0)
}

/// Applies the first-order wave operator `D = i (gamma^mu d_mu + Omega)` to a
/// stationary wavefunction sampled at `t = 0`, using the analytic time
/// derivative `d_0 -> -i epsilon` and a central difference in `x`.
fn apply_dirac(
    profile: &BackgroundProfile,
    psi: &impl Fn(f64) -> Spinor2,
    epsilon: f64,
    x: f64,
    h: f64,
) -> Spinor2 {
    let params = profile.params();
    let loc = profile.local_unchecked(x);
    let (g0, g1) = gamma::build_gamma_unchecked(&params, loc.a, loc.b);
    let omega = gamma::build_omega(&params, loc.ap, profile.eta());
    let dpsi_dx = cd1_spinor(psi, x, h);
    let psi_x = psi(x);
    let i = Complex64::new(0.0, 1.0);
    let time_term = g0.apply(&psi_x).scale(Complex64::new(0.0, -epsilon));
    let space_term = g1.apply(&dpsi_dx);
    let omega_term = omega.apply(&psi_x);
    (time_term + space_term + omega_term).scale(i)
}

/// Residual of the model Dirac equation `i (gamma^mu d_mu + Omega) Psi = m Psi`
/// on a sampled stationary wavefunction.
///
/// Returns the maximum over `xs` of the entrywise residual norm. Every
/// stencil point `x +/- h` must stay inside the profile domain.
pub fn dirac_residual(
    profile: &BackgroundProfile,
    psi: &impl Fn(f64) -> Spinor2,
    epsilon: f64,
    mass: f64,
    xs: &[f64],
    h: f64,
) -> Result<f64> {
    let (lo, hi) = profile.domain();
    let mut worst = 0.0f64;
    for &x in xs {
        if x - h <= lo || x + h >= hi {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        let d = apply_dirac(profile, psi, epsilon, x, h);
        let m_psi = psi(x).scale(Complex64::new(mass, 0.0));
        worst = worst.max((d - m_psi).max_abs());
    }
    Ok(worst)
}

/// Cross-checks the square of the first-order operator against the
/// second-order curved-space wave operator.
///
/// Two residuals are formed on the sample points: `|D^2 Psi - m^2 Psi|` with
/// `D` applied twice by nested central differences, and `|KG Psi + m^2 Psi|`
/// where `KG = g^{mu nu} d_mu d_nu + G^nu d_nu` uses the metric and the
/// contracted connections directly. The maximum of the two is returned; on an
/// exact solution both vanish to O(h^2).
pub fn dirac_square_vs_kg(
    profile: &BackgroundProfile,
    psi: &impl Fn(f64) -> Spinor2,
    epsilon: f64,
    mass: f64,
    xs: &[f64],
    h: f64,
) -> Result<f64> {
    let (lo, hi) = profile.domain();
    let params = profile.params();
    let m2 = Complex64::new(mass * mass, 0.0);
    let mut worst = 0.0f64;
    for &x in xs {
        if x - 2.0 * h <= lo || x + 2.0 * h >= hi {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        let d_once = |xx: f64| apply_dirac(profile, psi, epsilon, xx, h);
        let d_twice = apply_dirac(profile, &d_once, epsilon, x, h);
        let r1 = (d_twice - psi(x).scale(m2)).max_abs();

        let loc = profile.local_unchecked(x);
        let metric = gamma::build_metric(&params, loc.a, loc.b)?;
        let con = gamma::connection_contractions(&params, loc.a, loc.b, loc.ap, loc.bp)?;
        let psi_x = psi(x);
        let d1 = cd1_spinor(psi, x, h);
        let d2 = cd2_spinor(psi, x, h);
        let ie = Complex64::new(0.0, -epsilon);
        let kg = psi_x.scale(Complex64::new(-epsilon * epsilon * metric.g_upper[0][0], 0.0))
            + d1.scale(2.0 * metric.g_upper[0][1] * ie)
            + d2.scale(Complex64::new(metric.g_upper[1][1], 0.0))
            + psi_x.scale(Complex64::new(con.up[0], 0.0) * ie)
            + d1.scale(Complex64::new(con.up[1], 0.0));
        let r2 = (kg + psi_x.scale(m2)).max_abs();
        worst = worst.max(r1.max(r2));
    }
    Ok(worst)
}
