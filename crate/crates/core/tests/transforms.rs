mod common;

use common::*;
use fixpoint_core::problems::rotation_contraction;
use fixpoint_core::transforms::*;
use fixpoint_core::*;
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_recovers_contraction(theta in -3.0f64..3.0, inv in 0.05f64..1.0, y in prop::collection::vec(-5.0f64..5.0, 2)) {
        let gamma = 1.0 / inv;
        let t = rotation_contraction(theta, gamma).unwrap();
        let j = resolvent_from_contraction(&t, gamma).unwrap();
        let back = contraction_from_resolvent(&j, (gamma - 1.0) / 2.0).unwrap();
        let y = Point::from(y);
        let a = t.apply(&y).unwrap();
        let b = back.apply(&y).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12 * (1.0 + y.norm()));
        prop_assert!((back.gamma() - gamma).abs() < 1e-12 * gamma);
    }

    #[test]
    fn residual_correspondence(seed in 0u64..1000, mu in 0.0f64..2.0, y in vec3()) {
        let mut r = rng(seed);
        let (a, _) = random_linear_problem(&mut r, 3, mu);
        let t = contraction_from_resolvent(&a, mu).unwrap();
        let y = Point::from(y);
        let lhs = fixed_point_residual(&t, &y).unwrap();
        let (_, rr) = resolvent_residual(&a, &y).unwrap();
        let rhs = (1.0 + 1.0 / (1.0 + 2.0 * mu)) * &rr;
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + y.norm()));
    }

    #[test]
    fn fixed_points_and_zeros_coincide(seed in 0u64..1000, mu in 0.0f64..2.0) {
        let mut r = rng(seed);
        let (a, xs) = random_linear_problem(&mut r, 4, mu);
        let t = contraction_from_resolvent(&a, mu).unwrap();
        prop_assert!(fixed_point_residual(&t, &xs).unwrap().norm() <= 1e-10);
        prop_assert!(resolvent_residual(&a, &xs).unwrap().1.norm() <= 1e-10);
        let j = resolvent_from_contraction(&t, 1.0 + 2.0 * mu).unwrap();
        prop_assert!(resolvent_residual(&j, &xs).unwrap().1.norm() <= 1e-10);
    }

    #[test]
    fn induced_operator_is_strongly_monotone(theta in -3.0f64..3.0, inv in 0.05f64..1.0, p in prop::collection::vec(-5.0f64..5.0, 2), q in prop::collection::vec(-5.0f64..5.0, 2)) {
        let gamma = 1.0 / inv;
        let t = rotation_contraction(theta, gamma).unwrap();
        let j = resolvent_from_contraction(&t, gamma).unwrap();
        let (x1, u1) = resolvent_residual(&j, &Point::from(p)).unwrap();
        let (x2, u2) = resolvent_residual(&j, &Point::from(q)).unwrap();
        let dx = &x1 - &x2;
        let lhs = (&u1 - &u2).dot(&dx);
        prop_assert!(lhs >= j.mu() * dx.norm_sq() - 1e-10);
    }

    #[test]
    fn averaged_inequality(theta in -3.0f64..3.0, inv in 0.05f64..1.0, p in prop::collection::vec(-5.0f64..5.0, 2), q in prop::collection::vec(-5.0f64..5.0, 2)) {
        let gamma = 1.0 / inv;
        let t = rotation_contraction(theta, gamma).unwrap();
        let g = averaged_from_contraction(&t, gamma).unwrap();
        let (p, q) = (Point::from(p), Point::from(q));
        let dg = &g.apply(&p).unwrap() - &g.apply(&q).unwrap();
        let d = &p - &q;
        let lhs = dg.norm_sq() + (gamma - 1.0) / (gamma + 1.0) * d.norm_sq();
        let rhs = 2.0 * gamma / (1.0 + gamma) * dg.dot(&d);
        prop_assert!(lhs <= rhs + 1e-10 * (1.0 + d.norm_sq()));
    }

    #[test]
    fn resolvents_are_firmly_nonexpansive(seed in 0u64..1000, mu in 0.0f64..2.0, p in vec3(), q in vec3()) {
        let mut r = rng(seed);
        let (a, _) = random_linear_problem(&mut r, 3, mu);
        let (p, q) = (Point::from(p), Point::from(q));
        let dj = &a.resolve(&p).unwrap() - &a.resolve(&q).unwrap();
        prop_assert!(dj.norm_sq() <= dj.dot(&(&p - &q)) + 1e-12);
    }
}

#[test]
fn scaled_identity_transform_matches_analytic_resolvent() {
    // T = I/(1+2mu), mu = 0.5: J = (2/3) I, which is the resolvent of A = I/2
    let t = LinearMap::scaled_identity(3, 0.5, 2.0);
    let j = resolvent_from_contraction(&t, 2.0).unwrap();
    let a = LinearResolvent::new(
        {
            let mut m = DenseMatrix::identity(3);
            for i in 0..3 {
                m.set(i, i, 0.5);
            }
            m
        },
        0.5,
    )
    .unwrap();
    let mut r = rng(3);
    for _ in 0..100 {
        let y = random_point(&mut r, 3, 4.0);
        let u = j.resolve(&y).unwrap();
        assert!(u.max_abs_diff(&a.resolve(&y).unwrap()) < 1e-14);
        assert!(u.max_abs_diff(&((2.0 / 3.0) * &y)) < 1e-14);
    }
}

#[test]
fn contraction_from_resolvent_fixes_zero() {
    let mut r = rng(5);
    let (a, xs) = random_linear_problem(&mut r, 5, 0.3);
    let t = contraction_from_resolvent(&a, 0.3).unwrap();
    assert!(t.apply(&xs).unwrap().max_abs_diff(&xs) < 1e-12);
}
