mod common;

use fixpoint_core::analysis::restarted_bound;
use fixpoint_core::problems::power_monotone;
use fixpoint_core::restart::*;
use fixpoint_core::transforms::resolvent_from_contraction;
use fixpoint_core::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn schedule_invariants(mu in 0.05f64..5.0, alpha in 1.2f64..6.0, d0 in 0.1f64..5.0, n in 50usize..20_000) {
        let s = match make_schedule(mu, alpha, d0, n) {
            Ok(s) => s,
            Err(Error::InsufficientBudget { minimum, .. }) => {
                prop_assert!(minimum > n);
                return Ok(());
            }
            Err(e) => panic!("{e}"),
        };
        prop_assert_eq!(s.inner_counts.iter().sum::<usize>(), n - 1);
        let r = s.outer_count();
        for (i, &t) in s.inner_counts.iter().enumerate() {
            let k = (i + 1) as f64;
            let target = (s.lambda * (s.beta * k).exp()).ceil() as usize;
            if i + 1 < r {
                prop_assert_eq!(t, target);
            } else {
                prop_assert!(t >= target);
            }
            prop_assert!(t as f64 >= s.lambda * (s.beta * k).exp());
        }
        let next: usize = (1..=r + 1).map(|k| (s.lambda * (s.beta * k as f64).exp()).ceil() as usize).sum();
        prop_assert!(next > n - 1);
    }
}

fn power_start() -> Point {
    Point::from(vec![0.6, -0.3, 0.5, 0.2, -0.4])
}

#[test]
fn budget_accounting_and_single_segment() {
    let a = power_monotone(1.0, 2.0, 5).unwrap();
    let y0 = power_start();
    let s = make_schedule(1.0, 2.0, y0.norm(), 500).unwrap();
    let calls = std::sync::atomic::AtomicUsize::new(0);
    let counted = FnResolvent::new(5, 0.0, |y: &Point| {
        calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        a.resolve(y).unwrap()
    });
    let tr = restart::restarted_os_ppm(&counted, &y0, &s, &Probe::none()).unwrap();
    assert_eq!(calls.load(std::sync::atomic::Ordering::Relaxed), 500);
    assert_eq!(tr.len(), 501);

    // one segment: the initial step then a plain APPM run from J y0
    let single = RestartSchedule {
        lambda: 1.0,
        beta: 0.5,
        inner_counts: vec![9],
        budget: 10,
    };
    let tr = restart::restarted_os_ppm(&a, &y0, &single, &Probe::none()).unwrap();
    let x0 = a.resolve(&y0).unwrap();
    let appm = solvers::os_ppm(&a, 0.0, &x0, 9, &Probe::none()).unwrap();
    for j in 1..=9 {
        assert!(tr.records[j + 1].x.as_ref().unwrap().max_abs_diff(appm.records[j].x.as_ref().unwrap()) < 1e-15);
    }
}

#[test]
fn fixed_start_is_constant() {
    let a = power_monotone(1.0, 2.0, 3).unwrap();
    let s = make_schedule(1.0, 2.0, 1.0, 40).unwrap();
    let tr = restarted_os_ppm(&a, &Point::zeros(3), &s, &Probe::none()).unwrap();
    assert!(tr.records.iter().skip(1).all(|r| r.residual_sq == Some(0.0)));
    let t = FnMap::new(3, 1.0, |p: &Point| 0.5 * p);
    let tr = restarted_oc_halpern(&t, &Point::zeros(3), &s, &Probe::none()).unwrap();
    assert!(tr.iterates().all(|y| *y == Point::zeros(3)));
}

#[test]
fn descent_at_restart_boundaries() {
    for &(mu, alpha) in &[(1.0, 2.0), (0.5, 3.0), (2.0, 1.5)] {
        let a = power_monotone(mu, alpha, 5).unwrap();
        let y0 = power_start();
        let d0 = y0.norm();
        let s = make_schedule(mu, alpha, d0, 3000).unwrap();
        let tr = restarted_os_ppm(&a, &y0, &s, &Probe::none()).unwrap();
        // anchors x~_k sit at records 1, 1 + t_1, 1 + t_1 + t_2, ...
        let mut idx = 1;
        for k in 0..=s.outer_count() {
            let r = tr.records[idx].residual_sq.unwrap();
            assert!(r <= (-2.0 * k as f64).exp() * d0 * d0 * (1.0 + 1e-12), "k={k}");
            if k < s.outer_count() {
                idx += s.inner_counts[k];
            }
        }
        assert_eq!(idx, 3000);
        let fin = tr.final_residual_sq().unwrap();
        assert!(fin <= restarted_bound(3000, mu, alpha, d0).unwrap());
    }
}

#[test]
fn oc_halpern_form_matches_proximal_form() {
    let t = problems::rotation_contraction(2.0, 1.0).unwrap();
    let shift = Point::from(vec![0.4, -0.2]);
    let tt = FnMap::new(2, 1.0, move |p: &Point| {
        let q = p - &shift;
        let mut r = t.apply(&q).unwrap();
        r.axpy(1.0, &shift);
        r
    });
    let j = resolvent_from_contraction(&tt, 1.0).unwrap();
    let y0 = Point::from(vec![2.0, 1.0]);
    for s in grid_search_schedules(200, &default_grid(200)) {
        let os = restarted_os_ppm(&j, &y0, &s, &Probe::none()).unwrap();
        let oc = restarted_oc_halpern(&tt, &y0, &s, &Probe::none()).unwrap();
        assert_eq!(os.len(), oc.len());
        assert_eq!(os.restarts, oc.restarts);
        for i in 0..os.len() {
            assert!(os.records[i].y.max_abs_diff(&oc.records[i].y) < 1e-10, "i={i}");
        }
        for i in 0..oc.len() - 1 {
            let a = oc.records[i].residual.as_ref().unwrap();
            let b = os.records[i + 1].residual.as_ref().unwrap();
            assert!(a.max_abs_diff(&(2.0 * b)) < 1e-10);
        }
    }
}

#[test]
fn grid_search_is_competitive_with_known_parameters() {
    let (mu, alpha) = (1.0, 2.0);
    let a = power_monotone(mu, alpha, 5).unwrap();
    let y0 = power_start();
    let n = 2000;
    let known = make_schedule(mu, alpha, y0.norm(), n).unwrap();
    let base = restarted_os_ppm(&a, &y0, &known, &Probe::none())
        .unwrap()
        .final_residual_sq()
        .unwrap();
    let best = grid_search_schedules(n, &default_grid(n))
        .iter()
        .map(|s| {
            restarted_os_ppm(&a, &y0, s, &Probe::none())
                .unwrap()
                .final_residual_sq()
                .unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best <= 10.0 * base, "{best} vs {base}");
}

#[test]
fn mismatched_budget_is_rejected() {
    let a = power_monotone(1.0, 2.0, 2).unwrap();
    let s = RestartSchedule {
        lambda: 1.0,
        beta: 0.5,
        inner_counts: vec![3, 4],
        budget: 20,
    };
    assert!(matches!(
        restarted_os_ppm(&a, &Point::zeros(2), &s, &Probe::none()),
        Err(Error::Contract(_))
    ));
}
