//! Background profiles: the pairs of functions a(x), b(x) that generate the
//! metric and the gamma matrices, together with their boundaries and the
//! characteristic maps y(x) and q(x).
//!
//! Both profile functions solve u'' = f(x) u for the family's curvature
//! function f. A valid profile satisfies two constraints over its whole
//! domain: the spin-connection projection Sigma_0 = (1+ab)(a b' - a' b) is a
//! constant eta, and (1+ab)(a'^2 - a a'') equals eta^2. Configuration space
//! is the open interval between the roots of g00(x) = 1 - (1+ab) b(x)^2.
//!
//! Closed-form families are assembled from two sign branches glued at x = 0;
//! evaluation dispatches on sign(x) and the branch functions are analytic, so
//! residual checks may extend one branch across the origin via
//! [`BackgroundProfile::local_on_branch`].
//!
//! The trigonometric family stores a(x) = a0 cos(kx) -/+ sqrt(vt^2 - a0^2)
//! sin(kx) and b(x) = (vt/a0) sin(kx) (up to the common 1/sqrt(1+ab)
//! normalization), the unique combination with the same flat limit as the
//! hyperbolic family that keeps Sigma_0 = vt k and (1+ab)(a'^2 - a a'') =
//! (vt k)^2; it requires vt > |a0| and confines space to |x| <
//! arcsin(a0/vt)/k.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::verify::{
    adaptive_quadrature, bisect_root, de_quadrature, rk4_linear_second_order, GridSpec,
};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Default absolute tolerance for quadrature fallbacks and oracles.
const QUAD_TOL: f64 = 1e-12;

/// Spatial sign branch of a glued closed-form profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// x < 0 half.
    Neg,
    /// x >= 0 half.
    Pos,
}

impl Branch {
    pub fn of(x: f64) -> Self {
        if x < 0.0 {
            Branch::Neg
        } else {
            Branch::Pos
        }
    }

    pub fn sign(&self) -> f64 {
        match self {
            Branch::Neg => -1.0,
            Branch::Pos => 1.0,
        }
    }
}

/// Pointwise profile data: a, b and their x-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBackground {
    pub a: f64,
    pub ap: f64,
    pub b: f64,
    pub bp: f64,
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    LinearFlat {
        theta: f64,
        xi: f64,
        sign_a1: i8,
    },
    Hyperbolic {
        zeta: f64,
        vartheta: f64,
        a0: f64,
        k: f64,
        rho: f64,
        sigma: f64,
    },
    Trig {
        zeta: f64,
        vartheta: f64,
        a0: f64,
        k: f64,
        a_minus: f64,
    },
    InverseSquare {
        a0: f64,
        a1: f64,
        b0: f64,
        b1: f64,
    },
    Numeric {
        f: RealFn,
        grid: GridSpec,
        a: Vec<(f64, f64)>,
        b: Vec<(f64, f64)>,
    },
    Flat {
        a0: f64,
    },
}

/// Immutable background profile: family constants, model parameters, the
/// constant eta, and the domain boundaries.
#[derive(Clone)]
pub struct BackgroundProfile {
    params: ModelParams,
    eta: f64,
    domain: (f64, f64),
    kind: Kind,
}

impl std::fmt::Debug for BackgroundProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BackgroundProfile")
            .field("family", &self.family_name())
            .field("eta", &self.eta)
            .field("domain", &self.domain)
            .finish()
    }
}

impl BackgroundProfile {
    /// Flat-curvature family (f = 0): piecewise-linear a, linear b.
    ///
    /// Up to the 1/sqrt(1+ab) normalization, a(x) = (theta/xi)(1 - |xi kappa
    /// x|) and b(x) = xi kappa x for the standard orientation `sign_a1 = +1`;
    /// `sign_a1 = -1` swaps the two linear pieces of a so it grows away from
    /// the origin. eta = theta kappa, boundaries at +/- 1/(xi kappa).
    pub fn linear_flat(params: &ModelParams, theta: f64, xi: f64, sign_a1: i8) -> Result<Self> {
        params.validate()?;
        if !(theta > 0.0 && theta.is_finite()) || !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::Constraint(format!(
                "theta and xi must be positive, got theta = {theta}, xi = {xi}"
            )));
        }
        if sign_a1 != 1 && sign_a1 != -1 {
            return Err(Error::Constraint(format!(
                "sign_a1 must be +1 or -1, got {sign_a1}"
            )));
        }
        let kappa = params.kappa();
        if kappa <= 0.0 {
            return Err(Error::Constraint(
                "this family needs curvature_r > 0".into(),
            ));
        }
        let x_plus = 1.0 / (xi * kappa);
        Ok(Self {
            params: *params,
            eta: theta * kappa,
            domain: (-x_plus, x_plus),
            kind: Kind::LinearFlat { theta, xi, sign_a1 },
        })
    }

    /// Positive-constant-curvature family (f = zeta R): hyperbolic a, b.
    ///
    /// Up to the 1/sqrt(1+ab) normalization, a(x) = a0 [cosh(kx) -/+ rho
    /// sinh(kx)] per branch and b(x) = (vartheta/a0) sinh(kx), with k =
    /// kappa sqrt(zeta), rho = sqrt(1 + (vartheta/a0)^2), and eta =
    /// vartheta k. Boundaries at +/- asinh(|a0/vartheta|)/k.
    pub fn hyperbolic(params: &ModelParams, zeta: f64, vartheta: f64, a0: f64) -> Result<Self> {
        params.validate()?;
        Self::check_const_curvature_args(params, zeta, vartheta, a0)?;
        let k = params.kappa() * zeta.sqrt();
        let u = vartheta / a0;
        let rho = (1.0 + u * u).sqrt();
        let sigma = ((rho + 1.0) / (rho - 1.0)).sqrt();
        let x_plus = (a0 / vartheta).abs().asinh() / k;
        Ok(Self {
            params: *params,
            eta: vartheta * k,
            domain: (-x_plus, x_plus),
            kind: Kind::Hyperbolic {
                zeta,
                vartheta,
                a0,
                k,
                rho,
                sigma,
            },
        })
    }

    /// Negative-constant-curvature family (f = -zeta R): trigonometric a, b.
    ///
    /// Requires vartheta > |a0|. Boundaries from the generic g00 root search,
    /// which lands on +/- arcsin(|a0|/vartheta)/k.
    pub fn trig(params: &ModelParams, zeta: f64, vartheta: f64, a0: f64) -> Result<Self> {
        params.validate()?;
        Self::check_const_curvature_args(params, zeta, vartheta, a0)?;
        if vartheta <= a0.abs() {
            return Err(Error::Constraint(format!(
                "trigonometric family needs vartheta > |a0|, got vartheta = {vartheta}, a0 = {a0}"
            )));
        }
        let k = params.kappa() * zeta.sqrt();
        let a_minus = (vartheta * vartheta - a0 * a0).sqrt();
        let mut profile = Self {
            params: *params,
            eta: vartheta * k,
            domain: (0.0, 0.0),
            kind: Kind::Trig {
                zeta,
                vartheta,
                a0,
                k,
                a_minus,
            },
        };
        let upper = 0.5 * std::f64::consts::PI / k;
        let x_plus = bisect_root(
            |x| profile.g00(x),
            0.0,
            upper * (1.0 - 1e-12),
            1e-12 * upper,
        )?;
        profile.domain = (-x_plus, x_plus);
        Ok(profile)
    }

    /// Critical inverse-square curvature family (f = -1/(4 x^2), x > 0):
    /// a(x) = sqrt(kappa x) [a0 + a1 ln(kappa x)] and likewise b with b0, b1.
    ///
    /// eta is fixed by the constants, eta = (1+ab) kappa (a0 b1 - a1 b0);
    /// the domain is (0, X) with X the first root of g00. The curvature
    /// condition (1+ab)(a'^2 - a a'') = eta^2 is not satisfiable on this
    /// family (the left side is x-dependent for every choice of constants),
    /// so only the Sigma_0 = eta constraint applies here.
    pub fn inverse_square(params: &ModelParams, a0: f64, a1: f64, b0: f64, b1: f64) -> Result<Self> {
        params.validate()?;
        let kappa = params.kappa();
        if kappa <= 0.0 {
            return Err(Error::Constraint(
                "this family needs curvature_r > 0".into(),
            ));
        }
        let eta = params.one_plus_ab() * kappa * (a0 * b1 - a1 * b0);
        if eta == 0.0 {
            return Err(Error::Constraint(
                "a and b are linearly dependent (a0 b1 - a1 b0 = 0)".into(),
            ));
        }
        let mut profile = Self {
            params: *params,
            eta,
            domain: (0.0, f64::INFINITY),
            kind: Kind::InverseSquare { a0, a1, b0, b1 },
        };
        // Bracket the first root of g00 by doubling in kappa*x, then bisect.
        let mut hi = 1e-8 / kappa;
        let mut lo = hi;
        let mut found = false;
        while hi < 1e9 / kappa {
            if profile.g00(hi) < 0.0 {
                found = true;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        if !found {
            return Err(Error::BoundaryNotFound(
                "g00 has no root for kappa x in (1e-8, 1e9)".into(),
            ));
        }
        let x_plus = bisect_root(|x| profile.g00(x), lo, hi, 1e-12 * hi)?;
        profile.domain = (0.0, x_plus);
        if a1 != 0.0 {
            let x_zero = (-a0 / a1).exp() / kappa;
            if x_zero < x_plus {
                return Err(Error::Constraint(format!(
                    "a(x) vanishes at x = {x_zero} inside the domain (0, {x_plus})"
                )));
            }
        }
        Ok(profile)
    }

    /// General family: a and b integrated numerically from u'' = f(x) u with
    /// the given initial data `(u(0), u'(0))`, over `window` with `steps`
    /// RK4 steps, then b rescaled so that Sigma_0 = eta exactly.
    ///
    /// Boundaries are located from the sampled g00; a window side with no
    /// root fails with [`Error::BoundaryNotFound`]. `eta = 0` requires
    /// b identically zero (use [`BackgroundProfile::flat`] instead).
    pub fn numeric(
        params: &ModelParams,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a_init: (f64, f64),
        b_init: (f64, f64),
        eta: f64,
        window: (f64, f64),
        steps: usize,
    ) -> Result<Self> {
        params.validate()?;
        let (lo, hi) = window;
        if !(lo < 0.0 && hi > 0.0) {
            return Err(Error::Config(format!(
                "window ({lo}, {hi}) must contain 0"
            )));
        }
        if steps < 16 {
            return Err(Error::Config("need at least 16 integration steps".into()));
        }
        let w0 = params.one_plus_ab() * (a_init.0 * b_init.1 - a_init.1 * b_init.0);
        if w0 == 0.0 {
            return Err(Error::Constraint(
                "initial data make a and b linearly dependent".into(),
            ));
        }
        if eta == 0.0 {
            return Err(Error::Constraint(
                "eta = 0 is the flat degenerate case; use the flat constructor".into(),
            ));
        }
        let scale = eta / w0;

        // Integrate right on [0, hi] and left via the reflected equation on
        // [0, -lo], then assemble ascending arrays on a uniform grid.
        let n_right = ((steps as f64) * hi / (hi - lo)).ceil() as usize + 1;
        let n_left = ((steps as f64) * (-lo) / (hi - lo)).ceil() as usize + 1;
        let right = GridSpec::new(0.0, hi, n_right.max(9))?;
        let left = GridSpec::new(0.0, -lo, n_left.max(9))?;
        let a_r = rk4_linear_second_order(&f, a_init.0, a_init.1, right)?;
        let b_r = rk4_linear_second_order(&f, b_init.0, b_init.1, right)?;
        let f_refl = |t: f64| f(-t);
        let a_l = rk4_linear_second_order(f_refl, a_init.0, -a_init.1, left)?;
        let b_l = rk4_linear_second_order(f_refl, b_init.0, -b_init.1, left)?;

        let spacing = right.spacing().min(left.spacing());
        let n_total = ((hi - lo) / spacing).round() as usize + 1;
        let grid = GridSpec::new(lo, hi, n_total)?;
        let resample = |pos: &[(f64, f64)], neg: &[(f64, f64)], spec: (GridSpec, GridSpec)| {
            let (rg, lg) = spec;
            let mut out = Vec::with_capacity(grid.n);
            for x in grid.points() {
                let (u, up) = if x >= 0.0 {
                    hermite_eval(rg, pos, x, &f)
                } else {
                    let (u, up) = hermite_eval(lg, neg, -x, &f_refl);
                    (u, -up)
                };
                out.push((u, up));
            }
            out
        };
        let a = resample(&a_r, &a_l, (right, left));
        let mut b = resample(&b_r, &b_l, (right, left));
        for v in &mut b {
            v.0 *= scale;
            v.1 *= scale;
        }

        let mut profile = Self {
            params: *params,
            eta,
            domain: (lo, hi),
            kind: Kind::Numeric {
                f: Arc::new(f),
                grid,
                a,
                b,
            },
        };
        let g = |x: f64| profile.g00(x);
        let find = |from: f64, to: f64| -> Result<f64> {
            let n = 4096;
            let mut prev = from;
            for i in 1..=n {
                let x = from + (to - from) * (i as f64) / (n as f64);
                if g(prev).signum() != g(x).signum() {
                    let (a0, b0) = if prev < x { (prev, x) } else { (x, prev) };
                    return bisect_root(g, a0, b0, 1e-12 * (hi - lo));
                }
                prev = x;
            }
            Err(Error::BoundaryNotFound(format!(
                "g00 keeps its sign between {from} and {to}"
            )))
        };
        let x_plus = find(0.0, hi * (1.0 - 1e-12))?;
        let x_minus = find(0.0, lo * (1.0 - 1e-12))?;
        profile.domain = (x_minus, x_plus);
        Ok(profile)
    }

    /// Degenerate flat profile: a constant, b identically zero, eta = 0.
    ///
    /// g00 = 1 everywhere, so there are no boundaries; the domain is the
    /// whole line.
    pub fn flat(params: &ModelParams, a0: f64) -> Result<Self> {
        params.validate()?;
        if !(a0 != 0.0 && a0.is_finite()) {
            return Err(Error::Constraint("flat profile needs a0 != 0".into()));
        }
        Ok(Self {
            params: *params,
            eta: 0.0,
            domain: (f64::NEG_INFINITY, f64::INFINITY),
            kind: Kind::Flat { a0 },
        })
    }

    fn check_const_curvature_args(
        params: &ModelParams,
        zeta: f64,
        vartheta: f64,
        a0: f64,
    ) -> Result<()> {
        if !(zeta > 0.0 && zeta.is_finite()) || !(vartheta > 0.0 && vartheta.is_finite()) {
            return Err(Error::Constraint(format!(
                "zeta and vartheta must be positive, got zeta = {zeta}, vartheta = {vartheta}"
            )));
        }
        if !(a0 != 0.0 && a0.is_finite()) {
            return Err(Error::Constraint("a0 must be nonzero".into()));
        }
        if params.kappa() <= 0.0 {
            return Err(Error::Constraint(
                "this family needs curvature_r > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// The constant value of the spin-connection projection Sigma_0.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Open-interval domain (x_minus, x_plus); infinite for the flat profile.
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Boundaries of configuration space, the roots of g00.
    pub fn boundaries(&self) -> (f64, f64) {
        self.domain
    }

    pub fn family_name(&self) -> &'static str {
        match &self.kind {
            Kind::LinearFlat { .. } => "linear-flat",
            Kind::Hyperbolic { .. } => "hyperbolic-const",
            Kind::Trig { .. } => "trig-const",
            Kind::InverseSquare { .. } => "inverse-square-critical",
            Kind::Numeric { .. } => "numeric",
            Kind::Flat { .. } => "flat",
        }
    }

    /// Family constants (theta, xi, sign_a1) when this is the linear-flat
    /// family.
    pub fn linear_flat_constants(&self) -> Option<(f64, f64, i8)> {
        match self.kind {
            Kind::LinearFlat { theta, xi, sign_a1 } => Some((theta, xi, sign_a1)),
            _ => None,
        }
    }

    /// Family constants (k, rho, sigma) when this is the hyperbolic family.
    pub fn hyperbolic_constants(&self) -> Option<(f64, f64, f64)> {
        match self.kind {
            Kind::Hyperbolic { k, rho, sigma, .. } => Some((k, rho, sigma)),
            _ => None,
        }
    }

    /// The curvature function f(x) with a''(x) = f(x) a(x).
    pub fn curvature_f(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::LinearFlat { .. } | Kind::Flat { .. } => 0.0,
            Kind::Hyperbolic { zeta, .. } => zeta * self.params.curvature_r,
            Kind::Trig { zeta, .. } => -zeta * self.params.curvature_r,
            Kind::InverseSquare { .. } => -0.25 / (x * x),
            Kind::Numeric { f, .. } => f(x),
        }
    }

    /// Pointwise data with the open-domain check.
    pub fn local(&self, x: f64) -> Result<LocalBackground> {
        let (lo, hi) = self.domain;
        if !(x > lo && x < hi) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        Ok(self.local_unchecked(x))
    }

    /// Pointwise data dispatched on sign(x), without the domain check.
    pub fn local_unchecked(&self, x: f64) -> LocalBackground {
        self.local_on_branch(Branch::of(x), x)
    }

    /// Pointwise data of one analytic branch, evaluated anywhere.
    ///
    /// For families without branch structure (inverse-square, numeric, flat)
    /// the branch argument is ignored.
    pub fn local_on_branch(&self, branch: Branch, x: f64) -> LocalBackground {
        let s1ab = self.params.sqrt_one_plus_ab();
        let kappa = self.params.kappa();
        match &self.kind {
            Kind::LinearFlat { theta, xi, sign_a1 } => {
                let sg = -(*sign_a1 as f64) * branch.sign();
                let at = (theta / xi) * (1.0 + sg * xi * kappa * x);
                let atp = sg * theta * kappa;
                let bt = xi * kappa * x;
                let btp = xi * kappa;
                LocalBackground {
                    a: at / s1ab,
                    ap: atp / s1ab,
                    b: bt / s1ab,
                    bp: btp / s1ab,
                }
            }
            Kind::Hyperbolic {
                vartheta, a0, k, rho, ..
            } => {
                let sg = -branch.sign() * a0.signum();
                let (sh, ch) = ((k * x).sinh(), (k * x).cosh());
                let at = a0 * (ch + sg * rho * sh);
                let atp = a0 * k * (sh + sg * rho * ch);
                let u = vartheta / a0;
                LocalBackground {
                    a: at / s1ab,
                    ap: atp / s1ab,
                    b: u * sh / s1ab,
                    bp: u * k * ch / s1ab,
                }
            }
            Kind::Trig {
                vartheta,
                a0,
                k,
                a_minus,
                ..
            } => {
                let sg = -branch.sign() * a0.signum();
                let (sn, cs) = ((k * x).sin(), (k * x).cos());
                let at = a0 * cs + sg * a_minus * sn;
                let atp = k * (-a0 * sn + sg * a_minus * cs);
                let u = vartheta / a0;
                LocalBackground {
                    a: at / s1ab,
                    ap: atp / s1ab,
                    b: u * sn / s1ab,
                    bp: u * k * cs / s1ab,
                }
            }
            Kind::InverseSquare { a0, a1, b0, b1 } => {
                let u = kappa * x;
                let (sq, l) = (u.sqrt(), u.ln());
                let pa = a0 + a1 * l;
                let pb = b0 + b1 * l;
                LocalBackground {
                    a: sq * pa,
                    ap: kappa / sq * (0.5 * pa + a1),
                    b: sq * pb,
                    bp: kappa / sq * (0.5 * pb + b1),
                }
            }
            Kind::Numeric { f, grid, a, b } => {
                let fr: &dyn Fn(f64) -> f64 = &**f;
                let (av, apv) = hermite_eval(*grid, a, x, fr);
                let (bv, bpv) = hermite_eval(*grid, b, x, fr);
                LocalBackground {
                    a: av,
                    ap: apv,
                    b: bv,
                    bp: bpv,
                }
            }
            Kind::Flat { a0 } => LocalBackground {
                a: *a0,
                ap: 0.0,
                b: 0.0,
                bp: 0.0,
            },
        }
    }

    /// g00(x) = 1 - (1+ab) b(x)^2, the confinement function.
    pub fn g00(&self, x: f64) -> f64 {
        let b = self.local_unchecked(x).b;
        1.0 - self.params.one_plus_ab() * b * b
    }

    /// Sigma_0(x) = (1+ab)(a b' - a' b); constant and equal to eta on a
    /// valid profile.
    pub fn sigma0(&self, x: f64) -> f64 {
        let l = self.local_unchecked(x);
        self.params.one_plus_ab() * (l.a * l.bp - l.ap * l.b)
    }

    /// (1+ab)(a'^2 - a a'') with a'' = f(x) a; equals eta^2 on families that
    /// solve the full model.
    pub fn curvature_invariant(&self, x: f64) -> f64 {
        let l = self.local_unchecked(x);
        self.params.one_plus_ab() * (l.ap * l.ap - l.a * l.a * self.curvature_f(x))
    }

    /// Characteristic coordinate y(x), with dy/dx = 1/(a sqrt(1+ab)) and
    /// y(0) = 0 (for the inverse-square family, y(0+) = 0).
    ///
    /// Closed forms cover the linear-flat family and the hyperbolic family
    /// with a0 > 0; all other cases integrate adaptively.
    pub fn y(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain;
        if !(x > lo && x < hi) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        match &self.kind {
            Kind::LinearFlat { theta, xi, sign_a1 } => {
                let kappa = self.params.kappa();
                let sg = -(*sign_a1 as f64) * Branch::of(x).sign();
                let eta = theta * kappa;
                Ok(sg / eta * (1.0 + sg * xi * kappa * x).ln())
            }
            Kind::Hyperbolic { a0, k, sigma, .. } if *a0 > 0.0 => {
                let sb = Branch::of(x).sign();
                let w = (sb * k * x).exp();
                Ok(sb * 2.0 / self.eta * ((w / sigma).atanh() - (1.0 / sigma).atanh()))
            }
            Kind::Flat { a0 } => Ok(x / (a0 * self.params.sqrt_one_plus_ab())),
            _ => self.y_by_quadrature(x),
        }
    }

    /// Quadrature evaluation of y(x); the oracle for the closed forms.
    ///
    /// The inverse-square family integrates from its singular endpoint 0
    /// with the tanh-sinh rule; everything else uses adaptive Gauss-Kronrod.
    pub fn y_by_quadrature(&self, x: f64) -> Result<f64> {
        let s1ab = self.params.sqrt_one_plus_ab();
        let integrand = |t: f64| 1.0 / (s1ab * self.local_unchecked(t).a);
        if matches!(self.kind, Kind::InverseSquare { .. }) {
            de_quadrature(integrand, 0.0, x, QUAD_TOL)
        } else {
            adaptive_quadrature(integrand, 0.0, x, QUAD_TOL)
        }
    }

    /// Characteristic phase q(x), with dq/dx = b/a and q(0) = 0.
    pub fn q(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain;
        if !(x > lo && x < hi) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        match &self.kind {
            Kind::LinearFlat { theta, xi, sign_a1 } => {
                let sg = -(*sign_a1 as f64) * Branch::of(x).sign();
                let y = self.y(x)?;
                Ok(sg * ((xi / theta) * x - y))
            }
            Kind::Hyperbolic {
                vartheta, a0, k, rho, ..
            } if *a0 > 0.0 => {
                let u = vartheta / a0;
                let w = (k * x).exp();
                let pref = u / (a0 * k);
                if x >= 0.0 {
                    let d = ((1.0 - rho) * w * w + (1.0 + rho)) / 2.0;
                    Ok(pref * (-k * x / (1.0 + rho) - d.ln() / (u * u)))
                } else {
                    let d = ((1.0 + rho) * w * w + (1.0 - rho)) / 2.0;
                    Ok(pref * (k * x / (rho - 1.0) - d.ln() / (u * u)))
                }
            }
            Kind::Flat { .. } => Ok(0.0),
            _ => self.q_by_quadrature(x),
        }
    }

    /// Quadrature evaluation of q(x); the oracle for the closed forms.
    pub fn q_by_quadrature(&self, x: f64) -> Result<f64> {
        let integrand = |t: f64| {
            let l = self.local_unchecked(t);
            l.b / l.a
        };
        if matches!(self.kind, Kind::InverseSquare { .. }) {
            de_quadrature(integrand, 0.0, x, QUAD_TOL)
        } else {
            adaptive_quadrature(integrand, 0.0, x, QUAD_TOL)
        }
    }

    /// Serializable description; fails for the numeric and flat families.
    pub fn to_document(&self) -> Result<ProfileDocument> {
        let family = match &self.kind {
            Kind::LinearFlat { theta, xi, sign_a1 } => FamilyDoc::LinearFlat {
                theta: *theta,
                xi: *xi,
                sign_a1: *sign_a1,
            },
            Kind::Hyperbolic {
                zeta, vartheta, a0, ..
            } => FamilyDoc::HyperbolicConst {
                zeta: *zeta,
                vartheta: *vartheta,
                a0: *a0,
            },
            Kind::Trig {
                zeta, vartheta, a0, ..
            } => FamilyDoc::TrigConst {
                zeta: *zeta,
                vartheta: *vartheta,
                a0: *a0,
            },
            Kind::InverseSquare { a0, a1, b0, b1 } => FamilyDoc::InverseSquareCritical {
                a0: *a0,
                a1: *a1,
                b0: *b0,
                b1: *b1,
            },
            Kind::Numeric { .. } | Kind::Flat { .. } => {
                return Err(Error::UnsupportedFamily {
                    expected: "a closed-form family (numeric and flat profiles have no document form)",
                })
            }
        };
        Ok(ProfileDocument {
            family,
            eta: self.eta,
            domain: self.domain,
            model_params: self.params,
        })
    }

    /// Rebuilds a profile from its document; the stored eta and domain must
    /// match the values re-derived from the family constants.
    pub fn from_document(doc: &ProfileDocument) -> Result<Self> {
        let profile = match doc.family {
            FamilyDoc::LinearFlat { theta, xi, sign_a1 } => {
                Self::linear_flat(&doc.model_params, theta, xi, sign_a1)?
            }
            FamilyDoc::HyperbolicConst { zeta, vartheta, a0 } => {
                Self::hyperbolic(&doc.model_params, zeta, vartheta, a0)?
            }
            FamilyDoc::TrigConst { zeta, vartheta, a0 } => {
                Self::trig(&doc.model_params, zeta, vartheta, a0)?
            }
            FamilyDoc::InverseSquareCritical { a0, a1, b0, b1 } => {
                Self::inverse_square(&doc.model_params, a0, a1, b0, b1)?
            }
        };
        if profile.eta != doc.eta || profile.domain != doc.domain {
            return Err(Error::Constraint(
                "document eta/domain disagree with values derived from the family constants".into(),
            ));
        }
        Ok(profile)
    }
}

/// Serializable profile description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileDocument {
    pub family: FamilyDoc,
    pub eta: f64,
    pub domain: (f64, f64),
    pub model_params: ModelParams,
}

/// Family tag plus constants for the serializable families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum FamilyDoc {
    LinearFlat { theta: f64, xi: f64, sign_a1: i8 },
    HyperbolicConst { zeta: f64, vartheta: f64, a0: f64 },
    TrigConst { zeta: f64, vartheta: f64, a0: f64 },
    InverseSquareCritical { a0: f64, a1: f64, b0: f64, b1: f64 },
}

/// Cubic Hermite interpolation of (u, u') samples on a uniform grid, with
/// u'' = f u closing the derivative interpolation at the same order.
fn hermite_eval(
    grid: GridSpec,
    samples: &[(f64, f64)],
    x: f64,
    f: &dyn Fn(f64) -> f64,
) -> (f64, f64) {
    let h = grid.spacing();
    let pos = (x - grid.lo) / h;
    let i = (pos.floor() as usize).min(samples.len() - 2);
    let t = pos - i as f64;
    let (x0, x1) = (grid.x(i), grid.x(i + 1));
    let (u0, up0) = samples[i];
    let (u1, up1) = samples[i + 1];
    let u = hermite_cubic(t, h, u0, up0, u1, up1);
    let up = hermite_cubic(t, h, up0, f(x0) * u0, up1, f(x1) * u1);
    (u, up)
}

fn hermite_cubic(t: f64, h: f64, v0: f64, d0: f64, v1: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * v0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * v1
        + (t3 - t2) * h * d1
}

/// Reconstructs samples of x(a) for a profile whose curvature is given as a
/// function of a, by double integration: a'(a)^2 = slope_lo^2 +
/// 2 int_{a_lo}^{a} s f(s) ds defines R g(a)^2 = a'(a)^2, and x(a) = x0 +
/// sign int_{a_lo}^{a} ds / (kappa g(s)).
///
/// Returns `(a, x)` pairs on a uniform a-grid of `n + 1` points. Fails with
/// [`Error::TurningPoint`] where g vanishes inside the range.
pub fn profile_by_double_integration(
    f_of_a: impl Fn(f64) -> f64,
    a_lo: f64,
    a_hi: f64,
    n: usize,
    x0: f64,
    slope_lo: f64,
    curvature_r: f64,
    sign: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(a_lo < a_hi) || n < 2 {
        return Err(Error::Config(format!(
            "need a_lo < a_hi and n >= 2, got [{a_lo}, {a_hi}], n = {n}"
        )));
    }
    if !(curvature_r > 0.0) {
        return Err(Error::Config("curvature_r must be positive".into()));
    }
    let kappa = curvature_r.sqrt();
    let g = |a: f64| -> Result<f64> {
        let accum = adaptive_quadrature(|s| s * f_of_a(s), a_lo, a, QUAD_TOL)?;
        let gsq = (slope_lo * slope_lo + 2.0 * accum) / curvature_r;
        if gsq <= 0.0 {
            return Err(Error::TurningPoint { a });
        }
        Ok(gsq.sqrt())
    };
    let mut out = Vec::with_capacity(n + 1);
    let mut x = x0;
    let mut prev_a = a_lo;
    out.push((a_lo, x0));
    g(a_lo)?;
    for i in 1..=n {
        let a = a_lo + (a_hi - a_lo) * (i as f64) / (n as f64);
        g(a)?;
        let step = adaptive_quadrature(
            |s| match g(s) {
                Ok(v) => 1.0 / (kappa * v),
                Err(_) => f64::NAN,
            },
            prev_a,
            a,
            QUAD_TOL,
        )?;
        x += sign.signum() * step;
        out.push((a, x));
        prev_a = a;
    }
    Ok(out)
}
