//! Position-dependent gamma matrices, the metric they generate, connection
//! contractions, and the Omega matrix of the wave operator.
//!
//! The construction rests on two constant matrices,
//! M = [[1, alpha], [beta, -1]] and K = [[0, 1/tau], [tau, 0]], with
//! beta = -alpha tau^2. They satisfy M^2 = (1+ab) I, K^2 = I and
//! MK + KM = 0, so gamma1 = i a M and gamma0 = i b M + K close the Clifford
//! relation {gamma^mu, gamma^nu} = 2 g^{mu nu} I with the metric of
//! [`build_metric`]. The wave operator is i (gamma^mu d_mu + Omega) with
//! Omega = -i a' M + eta K; [`omega_from_definition`] assembles the same
//! matrix from its defining contraction (lambda d_mu + Sigma_mu) gamma^mu,
//! whose lambda dependence cancels identically.

use crate::background::{BackgroundProfile, Branch, LocalBackground};
use crate::complex2::Complex2x2;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::verify::cd1_matrix;
use num_complex::Complex64;

/// M = [[1, alpha], [beta, -1]]; squares to (1+ab) I.
pub fn m_matrix(params: &ModelParams) -> Complex2x2 {
    Complex2x2::from_real(1.0, params.alpha, params.beta(), -1.0)
}

/// K = [[0, 1/tau], [tau, 0]]; squares to I and anticommutes with M.
pub fn k_matrix(params: &ModelParams) -> Complex2x2 {
    Complex2x2::from_real(0.0, 1.0 / params.tau, params.tau, 0.0)
}

/// The gamma pair (gamma0, gamma1) = (i b M + K, i a M), after validating
/// the parameters.
pub fn build_gamma(params: &ModelParams, a: f64, b: f64) -> Result<(Complex2x2, Complex2x2)> {
    params.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "profile values must be finite, got a = {a}, b = {b}"
        )));
    }
    Ok(build_gamma_unchecked(params, a, b))
}

/// [`build_gamma`] without the validation pass, for hot loops over already
/// validated inputs.
pub fn build_gamma_unchecked(params: &ModelParams, a: f64, b: f64) -> (Complex2x2, Complex2x2) {
    let m = m_matrix(params);
    let k = k_matrix(params);
    let gamma1 = m.scale(Complex64::new(0.0, a));
    let gamma0 = m.scale(Complex64::new(0.0, b)) + k;
    (gamma0, gamma1)
}

/// gamma5 = i gamma0 gamma1, the chirality matrix of the pair.
pub fn gamma5(gamma0: &Complex2x2, gamma1: &Complex2x2) -> Complex2x2 {
    (*gamma0 * *gamma1).scale(Complex64::new(0.0, 1.0))
}

/// Contravariant and covariant metric with both determinants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    pub g_upper: [[f64; 2]; 2],
    pub g_lower: [[f64; 2]; 2],
    pub det_upper: f64,
    pub det_lower: f64,
}

/// Metric generated by the profile pair: g^{00} = 1 - (1+ab) b^2,
/// g^{01} = -(1+ab) a b, g^{11} = -(1+ab) a^2, with det(g_upper) =
/// -(1+ab) a^2 and g_lower its matrix inverse.
pub fn build_metric(params: &ModelParams, a: f64, b: f64) -> Result<MetricTensor> {
    params.validate()?;
    if a == 0.0 {
        return Err(Error::SingularMetric { x: f64::NAN });
    }
    let c = params.one_plus_ab();
    let g00 = 1.0 - c * b * b;
    let g01 = -c * a * b;
    let g11 = -c * a * a;
    let det_upper = -c * a * a;
    let det_lower = 1.0 / det_upper;
    let g_lower = [
        [g11 * det_lower, -g01 * det_lower],
        [-g01 * det_lower, g00 * det_lower],
    ];
    Ok(MetricTensor {
        g_upper: [[g00, g01], [g01, g11]],
        g_lower,
        det_upper,
        det_lower,
    })
}

/// Contracted connection coefficients, lower and upper index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connections {
    /// (G_0, G_1).
    pub low: [f64; 2],
    /// (G^0, G^1).
    pub up: [f64; 2],
}

/// G_0 = (1+ab)(a b' - a' b), G_1 = -(a' + b G_0)/a, G^0 = (1+ab) a b',
/// G^1 = (1+ab) a a'. The two index positions are related by the metric,
/// G^mu = g^{mu nu} G_nu.
pub fn connection_contractions(
    params: &ModelParams,
    a: f64,
    b: f64,
    ap: f64,
    bp: f64,
) -> Result<Connections> {
    if a == 0.0 {
        return Err(Error::SingularMetric { x: f64::NAN });
    }
    let c = params.one_plus_ab();
    let g_low0 = c * (a * bp - ap * b);
    let g_low1 = -(ap + b * g_low0) / a;
    Ok(Connections {
        low: [g_low0, g_low1],
        up: [c * a * bp, c * a * ap],
    })
}

/// Spin-connection contractions, lower and upper index, at a given lambda.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigmas {
    /// (Sigma_0, Sigma_1).
    pub low: [f64; 2],
    /// (Sigma^0, Sigma^1).
    pub up: [f64; 2],
}

/// Sigma^0 = (1+ab)(a b' + lambda a' b), Sigma^1 = (1+lambda)(1+ab) a a',
/// Sigma_0 = (1+ab)(a b' - a' b), Sigma_1 = -(1+lambda) a'/a -
/// (b/a) Sigma_0; related by Sigma_mu = g_{mu nu} Sigma^nu.
pub fn sigma_connections(
    params: &ModelParams,
    a: f64,
    b: f64,
    ap: f64,
    bp: f64,
    lambda: f64,
) -> Result<Sigmas> {
    if a == 0.0 {
        return Err(Error::SingularMetric { x: f64::NAN });
    }
    let c = params.one_plus_ab();
    let sig_low0 = c * (a * bp - ap * b);
    let sig_low1 = -(1.0 + lambda) * ap / a - (b / a) * sig_low0;
    Ok(Sigmas {
        low: [sig_low0, sig_low1],
        up: [c * (a * bp + lambda * ap * b), (1.0 + lambda) * c * a * ap],
    })
}

/// Omega = -i a' M + eta K, the matrix completing the first-order wave
/// operator. Independent of lambda.
pub fn build_omega(params: &ModelParams, ap: f64, eta: f64) -> Complex2x2 {
    m_matrix(params).scale(Complex64::new(0.0, -ap)) + k_matrix(params).scale_re(eta)
}

/// Omega assembled from its definition (lambda d_mu + Sigma_mu) gamma^mu =
/// i lambda a' M + Sigma_0 gamma0 + Sigma_1 gamma1.
///
/// The lambda dependence cancels between the derivative term and Sigma_1;
/// the result equals [`build_omega`] with eta replaced by the local Sigma_0.
pub fn omega_from_definition(
    params: &ModelParams,
    local: &LocalBackground,
    lambda: f64,
) -> Result<Complex2x2> {
    let sig = sigma_connections(params, local.a, local.b, local.ap, local.bp, lambda)?;
    let (g0, g1) = build_gamma_unchecked(params, local.a, local.b);
    Ok(m_matrix(params).scale(Complex64::new(0.0, lambda * local.ap))
        + g0.scale_re(sig.low[0])
        + g1.scale_re(sig.low[1]))
}

/// Residuals of the two defining operator identities at a point, using
/// central differences on one analytic branch for the x-derivatives.
///
/// The first residual is the worst over mu of
/// `|gamma^1 d_1 gamma^mu + {Omega, gamma^mu} - G^mu I|` (the time
/// derivative vanishes on the static background); the second is
/// `|gamma^1 d_1 Omega + Omega^2|`. Both vanish at O(h^2) on a profile that
/// solves the model; the second stays away from zero on the inverse-square
/// family, whose curvature condition has no solution.
pub fn algebra_residual(profile: &BackgroundProfile, x: f64, h: f64) -> Result<(f64, f64)> {
    let (lo, hi) = profile.domain();
    if !(x - h > lo && x + h < hi) {
        return Err(Error::OutOfDomain { x, lo, hi });
    }
    let params = profile.params();
    let branch = Branch::of(x);
    let eta = profile.eta();
    let gamma0_at = |xx: f64| {
        let l = profile.local_on_branch(branch, xx);
        build_gamma_unchecked(&params, l.a, l.b).0
    };
    let gamma1_at = |xx: f64| {
        let l = profile.local_on_branch(branch, xx);
        build_gamma_unchecked(&params, l.a, l.b).1
    };
    let omega_at = |xx: f64| build_omega(&params, profile.local_on_branch(branch, xx).ap, eta);

    let l = profile.local_on_branch(branch, x);
    let (g0, g1) = build_gamma_unchecked(&params, l.a, l.b);
    let omega = omega_at(x);
    let con = connection_contractions(&params, l.a, l.b, l.ap, l.bp)?;

    let d_g0 = cd1_matrix(&gamma0_at, x, h);
    let d_g1 = cd1_matrix(&gamma1_at, x, h);
    let d_om = cd1_matrix(&omega_at, x, h);

    let res_mu0 = (g1 * d_g0 + omega.anticommutator(&g0) - Complex2x2::scalar(con.up[0].into()))
        .max_abs();
    let res_mu1 = (g1 * d_g1 + omega.anticommutator(&g1) - Complex2x2::scalar(con.up[1].into()))
        .max_abs();
    let res5b = (g1 * d_om + omega * omega).max_abs();
    Ok((res_mu0.max(res_mu1), res5b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, tau: f64) -> ModelParams {
        ModelParams::new(alpha, tau, 0.0, 1.0, 0.2).unwrap()
    }

    fn assert_close(z: Complex64, re: f64, im: f64, tol: f64) {
        assert!(
            (z.re - re).abs() < tol && (z.im - im).abs() < tol,
            "{z} vs {re}+{im}i"
        );
    }

    #[test]
    fn flat_limit_gamma_matrices() {
        let p = params(0.0, 1.0);
        let (g0, g1) = build_gamma(&p, 1.0, 0.0).unwrap();
        assert_close(g1.m00, 0.0, 1.0, 1e-15);
        assert_close(g1.m11, 0.0, -1.0, 1e-15);
        assert_close(g1.m01, 0.0, 0.0, 1e-15);
        assert_close(g0.m01, 1.0, 0.0, 1e-15);
        assert_close(g0.m10, 1.0, 0.0, 1e-15);
        assert_close(g0.m00, 0.0, 0.0, 1e-15);
    }

    #[test]
    fn base_matrices_close_the_algebra() {
        for (alpha, tau) in [(0.0, 1.0), (0.2, 1.5), (-0.4, 0.7)] {
            let p = params(alpha, tau);
            let m = m_matrix(&p);
            let k = k_matrix(&p);
            let c = p.one_plus_ab();
            let msq = m * m - Complex2x2::scalar(c.into());
            let ksq = k * k - Complex2x2::identity();
            let anti = m.anticommutator(&k);
            assert!(msq.max_abs() < 1e-14);
            assert!(ksq.max_abs() < 1e-14);
            assert!(anti.max_abs() < 1e-14);
        }
    }

    #[test]
    fn anticommutators_reproduce_the_metric() {
        for (alpha, tau, a, b) in [
            (0.0, 1.0, 0.8, 0.3),
            (0.2, 1.5, 0.7, 0.3),
            (-0.3, 0.9, 1.2, -0.6),
        ] {
            let p = params(alpha, tau);
            let (g0, g1) = build_gamma(&p, a, b).unwrap();
            let metric = build_metric(&p, a, b).unwrap();
            let pairs = [
                (g0.anticommutator(&g0), metric.g_upper[0][0]),
                (g0.anticommutator(&g1), metric.g_upper[0][1]),
                (g1.anticommutator(&g1), metric.g_upper[1][1]),
            ];
            for (anti, g) in pairs {
                let res = (anti - Complex2x2::scalar(Complex64::new(2.0 * g, 0.0))).max_abs();
                assert!(res < 1e-12 * g.abs().max(1.0), "res {res} for g {g}");
            }
        }
    }

    #[test]
    fn metric_direct_substitution() {
        let p = params(0.0, 1.0);
        let m = build_metric(&p, 0.6, 0.5).unwrap();
        assert!((m.g_upper[0][0] - 0.75).abs() < 1e-15);
        assert!((m.g_upper[1][1] + 0.36).abs() < 1e-15);
        assert!((m.g_upper[0][1] + 0.30).abs() < 1e-15);
    }

    #[test]
    fn metric_flat_profile_is_diagonal() {
        let p = params(0.0, 1.0);
        let h = 0.3 / 0.5;
        let m = build_metric(&p, h, 0.0).unwrap();
        assert!((m.g_upper[0][0] - 1.0).abs() < 1e-15);
        assert_eq!(m.g_upper[0][1], 0.0);
        assert!((m.g_upper[1][1] + h * h).abs() < 1e-15);
    }

    #[test]
    fn metric_inverse_and_determinants() {
        for (alpha, tau, a, b) in [(0.0, 1.0, 0.6, 0.5), (0.2, 1.5, 0.7, 0.3)] {
            let p = params(alpha, tau);
            let m = build_metric(&p, a, b).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let mut s = 0.0;
                    for k in 0..2 {
                        s += m.g_upper[i][k] * m.g_lower[k][j];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((s - expect).abs() < 1e-12, "({i},{j}) = {s}");
                }
            }
            let c = p.one_plus_ab();
            assert!((m.det_upper + c * a * a).abs() < 1e-12 * (c * a * a).abs());
            assert!((m.det_upper * m.det_lower - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_rejects_vanishing_a() {
        let p = params(0.0, 1.0);
        assert!(matches!(
            build_metric(&p, 0.0, 0.5),
            Err(Error::SingularMetric { .. })
        ));
    }

    #[test]
    fn connection_direct_substitution() {
        let p = params(0.0, 1.0);
        let c = connection_contractions(&p, 1.0, 0.1, 0.2, 0.3).unwrap();
        assert!((c.low[0] - 0.28).abs() < 1e-15);
        assert!((c.up[1] - 0.2).abs() < 1e-15);
        assert!((c.up[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn connections_vanish_for_constant_profiles() {
        let p = params(0.2, 1.5);
        let c = connection_contractions(&p, 0.7, 0.4, 0.0, 0.0).unwrap();
        assert_eq!(c.low, [0.0, 0.0]);
        assert_eq!(c.up, [0.0, 0.0]);
    }

    #[test]
    fn connection_indices_related_by_metric() {
        for (alpha, tau, a, b, ap, bp) in [
            (0.0, 1.0, 1.0, 0.1, 0.2, 0.3),
            (0.2, 1.5, 0.7, 0.3, -0.4, 0.6),
            (-0.3, 0.9, 1.2, -0.6, 0.5, -0.2),
        ] {
            let p = params(alpha, tau);
            let m = build_metric(&p, a, b).unwrap();
            let c = connection_contractions(&p, a, b, ap, bp).unwrap();
            for mu in 0..2 {
                let contracted = m.g_upper[mu][0] * c.low[0] + m.g_upper[mu][1] * c.low[1];
                assert!(
                    (contracted - c.up[mu]).abs() < 1e-12 * c.up[mu].abs().max(1.0),
                    "mu {mu}: {contracted} vs {}",
                    c.up[mu]
                );
            }
        }
    }

    #[test]
    fn sigma_indices_related_by_metric() {
        for lambda in [0.0, 0.5, -1.3] {
            for (alpha, tau, a, b, ap, bp) in [
                (0.0, 1.0, 1.0, 0.1, 0.2, 0.3),
                (0.2, 1.5, 0.7, 0.3, -0.4, 0.6),
            ] {
                let p = params(alpha, tau);
                let m = build_metric(&p, a, b).unwrap();
                let s = sigma_connections(&p, a, b, ap, bp, lambda).unwrap();
                for mu in 0..2 {
                    let contracted = m.g_lower[mu][0] * s.up[0] + m.g_lower[mu][1] * s.up[1];
                    assert!(
                        (contracted - s.low[mu]).abs() < 1e-12 * s.low[mu].abs().max(1.0),
                        "lambda {lambda} mu {mu}: {contracted} vs {}",
                        s.low[mu]
                    );
                }
            }
        }
    }

    #[test]
    fn omega_vanishes_without_slope_and_eta() {
        let p = params(0.2, 1.5);
        assert_eq!(build_omega(&p, 0.0, 0.0).max_abs(), 0.0);
    }

    #[test]
    fn omega_on_linear_flat_positive_branch() {
        // On the x > 0 branch a' = -eta/sqrt(1+ab), so
        // Omega = (i eta/sqrt(1+ab)) M + eta K.
        let p = params(0.0, 1.0);
        let profile = BackgroundProfile::linear_flat(&p, 0.3, 0.5, 1).unwrap();
        let eta = profile.eta();
        let l = profile.local_unchecked(1.0);
        let omega = build_omega(&p, l.ap, eta);
        assert_close(omega.m00, 0.0, eta, 1e-15);
        assert_close(omega.m11, 0.0, -eta, 1e-15);
        assert_close(omega.m01, eta, 0.0, 1e-15);
        assert_close(omega.m10, eta, 0.0, 1e-15);
    }

    #[test]
    fn omega_definition_is_lambda_independent() {
        let p = params(0.2, 1.5);
        let profile = BackgroundProfile::hyperbolic(&p, 0.7, 0.3, 0.5).unwrap();
        for x in [-2.0, -0.3, 0.0, 0.8, 2.5] {
            let l = profile.local_unchecked(x);
            let w0 = omega_from_definition(&p, &l, 0.0).unwrap();
            let w1 = omega_from_definition(&p, &l, 0.73).unwrap();
            let w2 = omega_from_definition(&p, &l, -4.2).unwrap();
            assert!((w0 - w1).max_abs() < 1e-12 * w0.max_abs().max(1.0));
            assert!((w0 - w2).max_abs() < 1e-12 * w0.max_abs().max(1.0));
            let direct = build_omega(&p, l.ap, profile.eta());
            assert!((w0 - direct).max_abs() < 1e-10 * direct.max_abs().max(1.0));
        }
    }

    #[test]
    fn gamma5_flat_case_squares_and_anticommutes() {
        // With b = 0 the metric is diagonal: gamma5^2 = g00 g11 I =
        // det(g_upper) I, and gamma5 anticommutes with both gamma matrices.
        let p = params(0.2, 1.5);
        let (g0, g1) = build_gamma(&p, 0.7, 0.0).unwrap();
        let metric = build_metric(&p, 0.7, 0.0).unwrap();
        let five = gamma5(&g0, &g1);
        let sq = five * five;
        let expect = Complex2x2::scalar(Complex64::new(metric.det_upper, 0.0));
        assert!((sq - expect).max_abs() < 1e-12);
        assert!(five.anticommutator(&g0).max_abs() < 1e-14);
        assert!(five.anticommutator(&g1).max_abs() < 1e-14);
    }

    #[test]
    fn algebra_residual_small_on_solving_families() {
        let p = params(0.0, 1.0);
        let lin = BackgroundProfile::linear_flat(&p, 0.3, 0.5, 1).unwrap();
        let hyp = BackgroundProfile::hyperbolic(&p, 0.7, 0.3, 0.5).unwrap();
        for profile in [&lin, &hyp] {
            let (lo, hi) = profile.domain();
            let h = 1e-5 * (hi - lo);
            for i in 0..21 {
                let x = (lo + (hi - lo) * (i as f64) / 20.0) * 0.95;
                let (r5a, r5b) = algebra_residual(profile, x, h).unwrap();
                let scale = profile.eta().powi(2).max(1.0);
                assert!(r5a < 1e-6 * scale, "{} at {x}: {r5a}", profile.family_name());
                assert!(r5b < 1e-6 * scale, "{} at {x}: {r5b}", profile.family_name());
            }
        }
    }

    #[test]
    fn algebra_residual_exact_zero_on_flat_profile() {
        let p = params(0.0, 1.0);
        let flat = BackgroundProfile::flat(&p, 0.6).unwrap();
        let (r5a, r5b) = algebra_residual(&flat, 0.7, 1e-4).unwrap();
        assert_eq!(r5a, 0.0);
        assert_eq!(r5b, 0.0);
    }

    #[test]
    fn algebra_residual_converges_at_second_order() {
        let p = params(0.0, 1.0);
        let hyp = BackgroundProfile::hyperbolic(&p, 0.7, 0.3, 0.5).unwrap();
        let x = 1.0;
        let (a1, b1) = algebra_residual(&hyp, x, 1e-3).unwrap();
        let (a2, b2) = algebra_residual(&hyp, x, 5e-4).unwrap();
        for (big, small) in [(a1, a2), (b1, b2)] {
            let ratio = big / small;
            assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
        }
    }

    #[test]
    fn algebra_residual_detects_unsatisfied_curvature_condition() {
        let p = params(0.0, 1.0);
        let is = BackgroundProfile::inverse_square(&p, 1.0, 0.0, 0.1, 0.4).unwrap();
        let (_, hi) = is.domain();
        let h = 1e-5 * hi;
        let (r5a, r5b) = algebra_residual(&is, 0.5 * hi, h).unwrap();
        assert!(r5a < 1e-6, "{r5a}");
        assert!(r5b > 1e-3, "{r5b}");
    }

    #[test]
    fn algebra_residual_rejects_boundary_adjacent_points() {
        let p = params(0.0, 1.0);
        let lin = BackgroundProfile::linear_flat(&p, 0.3, 0.5, 1).unwrap();
        let (_, hi) = lin.domain();
        assert!(algebra_residual(&lin, hi - 1e-9, 1e-5).is_err());
    }
}
