mod common;

use common::*;
use fixpoint_core::analysis::{upper_bound_contraction, upper_bound_monotone};
use fixpoint_core::problems::{power_monotone, rotation_contraction, toy_monotone};
use fixpoint_core::solvers::*;
use fixpoint_core::transforms::{averaged_from_contraction, contraction_from_resolvent};
use fixpoint_core::*;
use nalgebra::{DMatrix, DVector};

fn theta15() -> f64 {
    15f64.to_radians()
}

#[test]
fn rotation_residual_matches_dense_oracle() {
    let t = problems::rotation_contraction(theta15(), 1.0 / 0.95).unwrap();
    let y = Point::from(vec![1.0, 0.0]);
    let r = fixed_point_residual(&t, &y).unwrap();
    let c = theta15().cos() * 0.95;
    let s = theta15().sin() * 0.95;
    let m = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let yv = DVector::from_column_slice(&[1.0, 0.0]);
    let expect = &yv - &m * &yv;
    assert!((r[0] - expect[0]).abs() < 1e-15 && (r[1] - expect[1]).abs() < 1e-15);
}

#[test]
fn toy_resolvent_residual_matches_linear_solve() {
    let a = toy_monotone(0.035, 101).unwrap();
    let (x, r) = resolvent_residual(&a, &Point::from(vec![1.0, 0.0])).unwrap();
    let m = DMatrix::from_row_slice(2, 2, &[1.035, 0.01, -0.01, 1.035]);
    let xs = m.lu().solve(&DVector::from_column_slice(&[1.0, 0.0])).unwrap();
    assert!((x[0] - xs[0]).abs() < 1e-15 && (x[1] - xs[1]).abs() < 1e-15);
    assert!((r[0] - (1.0 - xs[0])).abs() < 1e-15 && (r[1] + xs[1]).abs() < 1e-15);
    let sum = &x + &r;
    assert_eq!(sum.as_slice(), &[1.0, 0.0]);
}

/// The momentum recurrence with phi from direct sums and an LU solve per step.
fn os_ppm_oracle(m: &DMatrix<f64>, mu: f64, y0: &DVector<f64>, n: usize) -> Vec<DVector<f64>> {
    let g: f64 = 1.0 + 2.0 * mu;
    let phi = |k: i64| -> f64 {
        if k < 0 {
            0.0
        } else {
            (0..=k).map(|i| g.powi(2 * i as i32)).sum()
        }
    };
    let lu = (DMatrix::identity(m.nrows(), m.nrows()) + m).lu();
    let mut ys = vec![y0.clone()];
    let mut x_prev = y0.clone();
    let mut y_prev2 = y0.clone();
    for k in 1..=n as i64 {
        let y_prev = ys.last().unwrap().clone();
        let x = lu.solve(&y_prev).unwrap();
        let pk = phi(k);
        let y = &x + (phi(k - 1) - 1.0) / pk * (&x - &x_prev) - 2.0 * mu * phi(k - 1) / pk * (&y_prev - &x)
            + (1.0 + 2.0 * mu) * phi(k - 2) / pk * (&y_prev2 - &x_prev);
        y_prev2 = y_prev;
        x_prev = x;
        ys.push(y);
    }
    ys
}

#[test]
fn os_ppm_toy_matches_dense_oracle() {
    let a = toy_monotone(0.035, 101).unwrap();
    let y0 = Point::from(vec![1.0, 0.0]);
    let tr = os_ppm(&a, 0.035, &y0, 101, &Probe::none()).unwrap();
    let oracle = os_ppm_oracle(&dense_to_na(&a.matrix()), 0.035, &to_na(&y0), 101);
    for (rec, y) in tr.records.iter().zip(&oracle) {
        assert!(rec.y.max_abs_diff(&from_na(y)) < 1e-10, "k = {}", rec.k);
    }
}

#[test]
fn anchored_form_agrees_with_momentum_form() {
    let mut rng = rng(11);
    for &mu in &[0.0, 0.1, 1.0] {
        for _ in 0..5 {
            let (a, _) = random_linear_problem(&mut rng, 6, mu);
            let y0 = random_point(&mut rng, 6, 2.0);
            let p = os_ppm(&a, mu, &y0, 50, &Probe::none()).unwrap();
            let q = os_ppm_anchored(&a, mu, &y0, 50, &Probe::none()).unwrap();
            for (u, v) in p.records.iter().zip(&q.records) {
                assert!(u.y.max_abs_diff(&v.y) < 1e-12);
                assert_eq!(u.residual.is_some(), v.residual.is_some());
            }
        }
    }
}

#[test]
fn oc_halpern_through_transform_equals_os_ppm() {
    let mut rng = rng(12);
    for &mu in &[0.0, 0.1, 1.0] {
        let (a, _) = random_linear_problem(&mut rng, 8, mu);
        let y0 = random_point(&mut rng, 8, 1.0);
        let t = contraction_from_resolvent(&a, mu).unwrap();
        let oc = oc_halpern(&t, 1.0 + 2.0 * mu, &y0, 40, &Probe::none()).unwrap();
        let os = os_ppm(&a, mu, &y0, 40, &Probe::none()).unwrap();
        for (u, v) in oc.records.iter().zip(&os.records) {
            assert!(u.y.max_abs_diff(&v.y) < 1e-10);
        }
    }
}

#[test]
fn os_ppm_zero_mu_is_appm() {
    let mut rng = rng(13);
    let (a, _) = random_linear_problem(&mut rng, 4, 0.0);
    let y0 = random_point(&mut rng, 4, 1.0);
    let tr = os_ppm(&a, 0.0, &y0, 30, &Probe::none()).unwrap();
    let mut ys = vec![y0.clone()];
    let mut xs = vec![y0.clone()];
    for k in 1..=30usize {
        let x = a.resolve(ys.last().unwrap()).unwrap();
        let c = (k as f64 - 1.0) / (k as f64 + 1.0);
        let mut y = x.clone();
        y.axpy(c, &(&x - &xs[k - 1]));
        let back = if k >= 2 { &ys[k - 2] - &xs[k - 1] } else { Point::zeros(4) };
        y.axpy(c, &back);
        xs.push(x);
        ys.push(y);
    }
    for (rec, y) in tr.records.iter().zip(&ys) {
        assert!(rec.y.max_abs_diff(y) < 1e-12);
    }
}

#[test]
fn rate_bounds_hold_along_runs() {
    let mut rng = rng(14);
    for &mu in &[0.0, 0.05, 0.5] {
        for _ in 0..4 {
            let (a, xs) = random_linear_problem(&mut rng, 5, mu);
            let y0 = random_point(&mut rng, 5, 3.0);
            let tr = os_ppm(&a, mu, &y0, 60, &Probe::with_solution(&xs)).unwrap();
            let d0 = y0.dist_sq(&xs).sqrt();
            for rec in &tr.records[1..] {
                let b = upper_bound_monotone(rec.k, mu, d0);
                assert_eq!(rec.bound, Some(b));
                assert!(rec.residual_sq.unwrap() <= b + 1e-12);
            }
            let gamma = 1.0 + 2.0 * mu;
            let t = contraction_from_resolvent(&a, mu).unwrap();
            let tr = oc_halpern(&t, gamma, &y0, 60, &Probe::with_solution(&xs)).unwrap();
            for rec in &tr.records {
                let b = upper_bound_contraction(rec.k, gamma, d0);
                assert!(rec.residual_sq.unwrap() <= b + 1e-12);
            }
        }
    }
}

#[test]
fn picard_rotation_decays_geometrically() {
    let t = rotation_contraction(theta15(), 1.0 / 0.95).unwrap();
    let tr = picard(&t, &Point::from(vec![1.0, 0.0]), 101, &Probe::none()).unwrap();
    let r0 = tr.records[0].residual_sq.unwrap();
    for rec in &tr.records {
        let expect = r0 * 0.95f64.powi(2 * rec.k as i32);
        assert!((rec.residual_sq.unwrap() - expect).abs() <= 1e-12 * r0);
    }
}

#[test]
fn averaged_map_residuals_do_not_increase() {
    let t = rotation_contraction(1.2, 1.0).unwrap();
    let g = averaged_from_contraction(&t, 1.0).unwrap();
    // KM on the nonexpansive rotation and Picard on a 1/2-averaged map
    let y0 = Point::from(vec![1.0, -0.5]);
    let tr = km(&t, &y0, |_| 0.5, 100, &Probe::none()).unwrap();
    let half = FnMap::new(2, 1.0, |p: &Point| {
        let rp = Point::from(vec![p[0] * 1.2f64.cos() - p[1] * 1.2f64.sin(), p[0] * 1.2f64.sin() + p[1] * 1.2f64.cos()]);
        Point::lincomb(0.5, p, 0.5, &rp)
    });
    let tr2 = picard(&half, &y0, 100, &Probe::none()).unwrap();
    for tr in [&tr, &tr2] {
        for w in tr.records.windows(2) {
            assert!(w[1].residual_sq.unwrap() <= w[0].residual_sq.unwrap() * (1.0 + 1e-12));
        }
    }
    assert_eq!(g.averaging(), 0.5);
}

#[test]
fn ppm_power_operator_monotone_residuals() {
    let a = power_monotone(1.0, 2.0, 1).unwrap();
    let tr = ppm(&a, &Point::from(vec![2.0]), 1, &Probe::none()).unwrap();
    assert!((tr.records[1].x.as_ref().unwrap()[0] - 1.0).abs() < 1e-15);

    for &(mu, alpha) in &[(1.0, 2.0), (0.5, 3.0), (2.0, 1.5)] {
        let a = power_monotone(mu, alpha, 5).unwrap();
        let y0 = Point::from(vec![1.0, -2.0, 0.5, 0.0, 1.5]);
        let tr = ppm(&a, &y0, 300, &Probe::none()).unwrap();
        let res: Vec<f64> = tr.records[1..].iter().map(|r| r.residual_sq.unwrap()).collect();
        for w in res.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        // A_k >= A_{k+1} (1 + mu A_{k+1}^{(alpha-1)/2})^2 with A_k = ||x_k - x_star||^2
        let dist: Vec<f64> = tr.records.iter().map(|r| r.x.as_ref().unwrap().norm_sq()).collect();
        for w in dist.windows(2) {
            let rhs = w[1] * (1.0 + mu * w[1].powf((alpha - 1.0) / 2.0)).powi(2);
            assert!(w[0] >= rhs * (1.0 - 1e-12), "{} < {}", w[0], rhs);
        }
    }
}

#[test]
fn dimension_mismatch_is_an_error() {
    let t = rotation_contraction(0.1, 1.0).unwrap();
    assert!(matches!(
        picard(&t, &Point::zeros(3), 3, &Probe::none()),
        Err(Error::DimensionMismatch { .. })
    ));
    let a = toy_monotone(0.1, 10).unwrap();
    assert!(os_ppm(&a, 0.1, &Point::zeros(3), 3, &Probe::none()).is_err());
}
