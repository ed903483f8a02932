//! Property tests for the structural invariants of the model: the algebra
//! the gamma pair must close into, the dispersion identities of the decay
//! parameter, exactness of the closed-form modes, and the serialization
//! contract of profile documents.

use curved_dirac::background::ProfileDocument;
use curved_dirac::free::{self, Subspace};
use curved_dirac::gamma;
use curved_dirac::{BackgroundProfile, Complex2x2, FreeSpinor, ModelParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = ModelParams> {
    (-0.9f64..0.9, 0.4f64..2.5, 0.05f64..1.0).prop_filter_map(
        "alpha tau pair must stay subcritical",
        |(alpha, tau, r)| ModelParams::new(alpha, tau, 0.0, 1.0, r).ok(),
    )
}

fn hyperbolic_strategy() -> impl Strategy<Value = BackgroundProfile> {
    (
        params_strategy(),
        0.2f64..1.5,
        0.1f64..1.2,
        0.05f64..0.9,
    )
        .prop_filter_map("constants must satisfy the family constraints", |(p, z, v, a0)| {
            BackgroundProfile::hyperbolic(&p, z, v, a0).ok()
        })
}

fn linear_strategy() -> impl Strategy<Value = BackgroundProfile> {
    (params_strategy(), 0.05f64..1.2, 0.1f64..1.5).prop_filter_map(
        "constants must satisfy the family constraints",
        |(p, theta, xi)| BackgroundProfile::linear_flat(&p, theta, xi, 1).ok(),
    )
}

fn linear_alpha0_strategy() -> impl Strategy<Value = BackgroundProfile> {
    (0.4f64..2.5, 0.05f64..1.0, 0.05f64..1.2, 0.1f64..1.5).prop_filter_map(
        "constants must satisfy the family constraints",
        |(tau, r, theta, xi)| {
            let p = ModelParams::new(0.0, tau, 0.0, 1.0, r).ok()?;
            BackgroundProfile::linear_flat(&p, theta, xi, 1).ok()
        },
    )
}

fn identity_scaled(c: f64) -> Complex2x2 {
    Complex2x2::identity().scale_re(c)
}

proptest! {
    #[test]
    fn clifford_relation_closes_for_random_pairs(
        params in params_strategy(),
        a in prop_oneof![-2.0f64..-0.05, 0.05f64..2.0],
        b in -1.5f64..1.5,
    ) {
        let (g0, g1) = gamma::build_gamma(&params, a, b).unwrap();
        let metric = gamma::build_metric(&params, a, b).unwrap();
        let scale = 1.0 + metric.g_upper[0][0].abs().max(metric.g_upper[1][1].abs());
        let pairs = [
            (g0, g0, metric.g_upper[0][0]),
            (g0, g1, metric.g_upper[0][1]),
            (g1, g1, metric.g_upper[1][1]),
        ];
        for (x, y, g) in pairs {
            let res = (x.anticommutator(&y) - identity_scaled(2.0 * g)).max_abs();
            prop_assert!(res <= 1e-12 * scale, "residual {res:.3e}");
        }
    }

    #[test]
    fn metric_inverse_and_determinants_are_consistent(
        params in params_strategy(),
        a in prop_oneof![-2.0f64..-0.05, 0.05f64..2.0],
        b in -1.5f64..1.5,
    ) {
        let m = gamma::build_metric(&params, a, b).unwrap();
        prop_assert!((m.det_upper * m.det_lower - 1.0).abs() <= 1e-12);
        let expected_det = -params.one_plus_ab() * a * a;
        prop_assert!((m.det_upper - expected_det).abs() <= 1e-12 * expected_det.abs());
        for i in 0..2 {
            for j in 0..2 {
                let prod: f64 = (0..2).map(|k| m.g_upper[i][k] * m.g_lower[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((prod - want).abs() <= 1e-10, "entry ({i},{j}) = {prod}");
            }
        }
    }

    #[test]
    fn decay_parameter_satisfies_quartic_and_bounds(
        epsilon in -10.0f64..10.0,
        eta in -3.0f64..3.0,
        m in 0.0f64..3.0,
    ) {
        let dd = free::decay_parameter(epsilon, m, eta).unwrap();
        let m2 = m * m + eta * eta;
        let w2 = dd.omega * dd.omega;
        let residual = w2 * w2 - (m2 - epsilon * epsilon) * w2 - eta * eta * epsilon * epsilon;
        let scale = (w2 * w2).max((m2 - epsilon * epsilon).abs() * w2)
            .max(eta * eta * epsilon * epsilon)
            .max(1.0);
        prop_assert!(residual.abs() <= 1e-12 * scale, "quartic residual {residual:.3e}");
        if !dd.is_flat_scattering() {
            prop_assert!(dd.omega >= eta.abs() - 1e-12 * scale);
            prop_assert!(dd.omega <= m2.sqrt() + 1e-12 * scale);
        }
        let mirrored = free::decay_parameter(-epsilon, m, eta).unwrap();
        prop_assert!((mirrored.omega - dd.omega).abs() <= 1e-12 * (1.0 + dd.omega));
    }

    #[test]
    fn exact_modes_solve_the_first_order_system(
        epsilon in prop_oneof![-5.0f64..-0.05, 0.05f64..5.0],
        eta in prop_oneof![-1.5f64..-0.05, 0.05f64..1.5],
        tau in 0.4f64..2.5,
        subspace in prop_oneof![Just(Subspace::PositiveEnergy), Just(Subspace::NegativeEnergy)],
    ) {
        let m = 1.0;
        let dd = free::decay_parameter(epsilon, m, eta).unwrap();
        let params = ModelParams::new(0.0, tau, 0.0, m, 0.2).unwrap();
        let n = free::coupling_matrix(&params, epsilon, eta);
        for s in [1.0, -1.0] {
            let modes = free::chi_modes(
                &dd,
                m,
                eta,
                tau,
                Complex64::new(0.8, -0.2),
                Complex64::new(-0.3, 0.6),
                s,
                subspace,
            )
            .unwrap();
            let exact = if s > 0.0 { &modes[0] } else { &modes[1] };
            let v = curved_dirac::Spinor2::new(exact.up, exact.dn);
            let lhs = v.scale(exact.rate);
            let rhs = n.apply(&v).scale(Complex64::from(-1.0));
            let gap = (lhs.up - rhs.up).norm().max((lhs.dn - rhs.dn).norm());
            prop_assert!(gap <= 1e-12 * (1.0 + v.max_abs()), "system gap {gap:.3e}");
        }
    }

    #[test]
    fn origin_matching_makes_the_assembly_continuous(
        profile in hyperbolic_strategy(),
        epsilon in prop_oneof![-3.0f64..-0.05, 0.05f64..3.0],
        re_a in -1.5f64..1.5,
        im_a in -1.5f64..1.5,
        re_b in -1.5f64..1.5,
        im_b in -1.5f64..1.5,
    ) {
        let a_plus = Complex64::new(re_a, im_a);
        let b_plus = Complex64::new(re_b, im_b);
        let spinor =
            FreeSpinor::matched(&profile, epsilon, a_plus, b_plus, Subspace::PositiveEnergy)
                .unwrap();
        let params = profile.params();
        let eta = profile.eta();
        let dd = free::decay_parameter(epsilon, params.mass, eta).unwrap();
        let sum_at_origin = |s: f64, a: Complex64, b: Complex64| {
            let modes =
                free::chi_modes(&dd, params.mass, eta, params.tau, a, b, s, spinor.subspace)
                    .unwrap();
            (
                modes[0].up + modes[1].up,
                modes[0].dn + modes[1].dn,
            )
        };
        let (ru, rd) = sum_at_origin(1.0, spinor.a_plus, spinor.b_plus);
        let (lu, ld) = sum_at_origin(-1.0, spinor.a_minus, spinor.b_minus);
        let scale = 1.0 + ru.norm().max(rd.norm());
        prop_assert!((ru - lu).norm() <= 1e-10 * scale, "up gap {:.3e}", (ru - lu).norm());
        prop_assert!((rd - ld).norm() <= 1e-10 * scale, "dn gap {:.3e}", (rd - ld).norm());
    }

    #[test]
    fn density_is_nonnegative_inside_the_domain(
        profile in linear_alpha0_strategy(),
        epsilon in prop_oneof![-3.0f64..-0.05, 0.05f64..3.0],
        re_a in -1.5f64..1.5,
        im_b in -1.5f64..1.5,
        u in -0.999f64..0.999,
    ) {
        let spinor = FreeSpinor::matched(
            &profile,
            epsilon,
            Complex64::new(re_a, 0.3),
            Complex64::new(0.2, im_b),
            Subspace::PositiveEnergy,
        )
        .unwrap();
        let (_, hi) = profile.domain();
        let x = u * hi;
        let psi = free::evaluate_spinor(&profile, &spinor, 0.0, x).unwrap();
        let rho = free::probability_density(&profile, &psi, x).unwrap();
        prop_assert!(rho >= 0.0, "density {rho:.3e} at x = {x}");
    }

    #[test]
    fn sigma0_is_the_constant_eta_across_the_domain(
        profile in hyperbolic_strategy(),
        u in -0.95f64..0.95,
    ) {
        let (_, hi) = profile.domain();
        let x = u * hi;
        let drift = (profile.sigma0(x) - profile.eta()).abs();
        prop_assert!(drift <= 1e-9 * (1.0 + profile.eta().abs()), "drift {drift:.3e}");
    }

    #[test]
    fn profile_documents_roundtrip_bitwise(
        profile in prop_oneof![linear_strategy(), hyperbolic_strategy()],
        u in -0.9f64..0.9,
    ) {
        let doc = profile.to_document().unwrap();
        let text = serde_json::to_string(&doc).unwrap();
        let parsed: ProfileDocument = serde_json::from_str(&text).unwrap();
        let rebuilt = BackgroundProfile::from_document(&parsed).unwrap();
        let (_, hi) = profile.domain();
        let x = u * hi;
        let a = profile.local(x).unwrap();
        let b = rebuilt.local(x).unwrap();
        prop_assert_eq!(a.a.to_bits(), b.a.to_bits());
        prop_assert_eq!(a.ap.to_bits(), b.ap.to_bits());
        prop_assert_eq!(a.b.to_bits(), b.b.to_bits());
        prop_assert_eq!(a.bp.to_bits(), b.bp.to_bits());
        prop_assert_eq!(profile.eta().to_bits(), rebuilt.eta().to_bits());
    }
}
