use fixpoint::apps::ct::{ct_pdhg, grad, grad_adjoint, CtPdhg};
use fixpoint::apps::emd::{self, default_tau, emd_pdhg, GridMeasurePair};
use fixpoint::apps::network::{metropolis_weights, pg_extra, Graph, NetworkProblem, SensingSetup};
use fixpoint::apps::radon::parallel_beam;
use fixpoint_core::solvers::picard;
use fixpoint_core::{metric_norm_sq, FixedPointMap, MetricMatrix, Point, Probe};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Forward differences as an explicit matrix, rows ordered (horizontal, vertical).
fn dense_difference(side: usize) -> DMatrix<f64> {
    let nn = side * side;
    let mut d = DMatrix::zeros(2 * nn, nn);
    for i in 0..side {
        for j in 0..side {
            let p = i * side + j;
            if j + 1 < side {
                d[(p, p + 1)] = 1.0;
                d[(p, p)] = -1.0;
            }
            if i + 1 < side {
                d[(nn + p, p + side)] = 1.0;
                d[(nn + p, p)] = -1.0;
            }
        }
    }
    d
}

fn ct_dense_step(op: &CtPdhg, z: &[f64]) -> Vec<f64> {
    let (alpha, beta, lambda) = op.stepsizes();
    let dense = op.radon().to_dense();
    let e = DMatrix::from_fn(op.data_len(), op.image_len(), |i, j| dense[i][j]);
    let d = dense_difference(op.side());
    let (x, u, v) = op.split(z);
    let (x, u, v) = (DVector::from_column_slice(x), DVector::from_column_slice(u), DVector::from_column_slice(v));
    let b = DVector::from_column_slice(op.measurements());
    let x1 = &x - alpha * e.transpose() * &u - beta * d.transpose() * &v;
    let bar = 2.0 * &x1 - &x;
    let u1 = (&u + alpha * &e * &bar - alpha * &b) / (1.0 + alpha);
    let bound = lambda * alpha / beta;
    let v1 = (&v + beta * &d * &bar).map(|t| t.clamp(-bound, bound));
    x1.iter().chain(u1.iter()).chain(v1.iter()).copied().collect()
}

#[test]
fn ct_step_matches_dense_reference() {
    let (op, _) = ct_pdhg(32, 16, 0.01, 0.03, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let z = gaussian(&mut rng, op.dim(), 1.0);
    let got = op.apply(&Point::from(z.clone())).unwrap();
    let want = ct_dense_step(&op, &z);
    let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-10, "max deviation {err}");
}

#[test]
fn ct_operators_are_adjoint_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let side = 24;
    let e = parallel_beam(side, 10).unwrap();
    let x = gaussian(&mut rng, side * side, 1.0);
    let u = gaussian(&mut rng, e.rows(), 1.0);
    let lhs = dot(&e.mul(&x), &u);
    let rhs = dot(&x, &e.tr_mul(&u));
    assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    let g = gaussian(&mut rng, 2 * side * side, 1.0);
    let lhs = dot(&grad(&x, side), &g);
    let rhs = dot(&x, &grad_adjoint(&g, side));
    assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
}

#[test]
fn emd_divergence_is_minus_grad_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [2, 5, 16] {
        let phi = gaussian(&mut rng, n * n, 1.0);
        let mx = gaussian(&mut rng, n * n, 1.0);
        let my = gaussian(&mut rng, n * n, 1.0);
        let (gx, gy) = emd::grad(&phi, n);
        let lhs = dot(&gx, &mx) + dot(&gy, &my);
        let rhs = -dot(&phi, &emd::div(&mx, &my, n));
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "n={n}");
    }
}

#[test]
fn emd_preserves_mass_balance_residual() {
    // div sums to zero, so the dual update moves the sum of phi only by the mass gap, which is zero
    let op = emd_pdhg(GridMeasurePair::two_circles(12).unwrap(), 1e-3, 1.0, default_tau(1e-3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let z = Point::from(gaussian(&mut rng, op.dim(), 1.0));
    let tz = op.apply(&z).unwrap();
    let nn = 144;
    let before: f64 = z.as_slice()[2 * nn..].iter().sum();
    let after: f64 = tz.as_slice()[2 * nn..].iter().sum();
    assert!((before - after).abs() < 1e-9);
}

fn network() -> NetworkProblem {
    NetworkProblem::compressed_sensing(&SensingSetup::default()).unwrap()
}

#[test]
fn pg_extra_step_matches_dense_reference() {
    let p = network();
    let op = pg_extra(p.clone()).unwrap();
    let (m, n) = (p.graph.nodes, p.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = gaussian(&mut rng, op.dim(), 1.0);
    let got = op.apply(&Point::from(z.clone())).unwrap();

    // rows are nodes, columns are coordinates
    let x = DMatrix::from_row_slice(m, n, &z[..m * n]);
    let w = DMatrix::from_row_slice(m, n, &z[m * n..]);
    let mix = DMatrix::from_fn(m, m, |i, j| p.mixing[i][j]);
    let wx = &mix * &x;
    let mut grads = DMatrix::zeros(m, n);
    for i in 0..m {
        let rows = p.sensing[i].len();
        let a = DMatrix::from_fn(rows, n, |r, c| p.sensing[i][r][c]);
        let b = DVector::from_column_slice(&p.measurements[i]);
        let g = a.transpose() * (&a * x.row(i).transpose() - b);
        grads.set_row(i, &g.transpose());
    }
    let t = p.alpha * p.lambda;
    let x1 = (&wx - p.alpha * grads - &w).map(|v| v.signum() * (v.abs() - t).max(0.0));
    let w1 = &w + 0.5 * (&x - &wx);
    let want: Vec<f64> = x1.transpose().iter().chain(w1.transpose().iter()).copied().collect();
    let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-10, "max deviation {err}");
}

#[test]
fn pg_extra_consensus_fixed_point() {
    // lambda = 0, A_i = I, b_i = b: every node at b with w = 0 is stationary
    let n = 4;
    let graph = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
    let w = metropolis_weights(&graph).unwrap();
    let b = vec![0.5, -1.0, 2.0, 0.0];
    let eye: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let p = NetworkProblem {
        graph,
        dim: n,
        sensing: vec![eye; 3],
        measurements: vec![b.clone(); 3],
        lambda: 0.0,
        alpha: 0.1,
        mixing: (0..3).map(|i| w.row(i).to_vec()).collect(),
        signal: None,
    };
    let op = pg_extra(p).unwrap();
    let mut z: Vec<f64> = b.iter().cycle().take(3 * n).copied().collect();
    z.extend(vec![0.0; 3 * n]);
    let z = Point::from(z);
    assert!(op.apply(&z).unwrap().max_abs_diff(&z) < 1e-15);
}

/// Samples pairs and checks ||T a - T b||_M <= ||a - b||_M.
fn check_nonexpansive<T: FixedPointMap, M: MetricMatrix>(t: &T, m: &M, sample: &mut dyn FnMut() -> Point) {
    for _ in 0..6 {
        let (a, b) = (sample(), sample());
        let before = metric_norm_sq(m, &(&a - &b)).unwrap();
        let after = metric_norm_sq(m, &(&t.apply(&a).unwrap() - &t.apply(&b).unwrap())).unwrap();
        assert!(after <= before * (1.0 + 1e-9), "{after} > {before}");
    }
}

#[test]
fn application_maps_are_nonexpansive_in_their_metrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (ct, ctm) = ct_pdhg(16, 12, 0.01, 0.03, 1.0).unwrap();
    let dim = ct.dim();
    check_nonexpansive(&ct, &ctm, &mut || Point::from(gaussian(&mut rng, dim, 1.0)));

    let mu = 1e-3;
    let op = emd_pdhg(GridMeasurePair::two_circles(12).unwrap(), mu, 1.0, default_tau(mu)).unwrap();
    let em = op.metric();
    let dim = op.dim();
    check_nonexpansive(&op, &em, &mut || Point::from(gaussian(&mut rng, dim, 1.0)));

    let pg = pg_extra(network()).unwrap();
    let pm = pg.metric().unwrap();
    let (m, n) = (10, 50);
    check_nonexpansive(&pg, &pm, &mut || {
        let mut z = gaussian(&mut rng, 2 * m * n, 0.1);
        // w must have zero node-sum, the subspace reachable from w = 0
        for k in 0..n {
            let mean: f64 = (0..m).map(|i| z[m * n + i * n + k]).sum::<f64>() / m as f64;
            for i in 0..m {
                z[m * n + i * n + k] -= mean;
            }
        }
        Point::from(z)
    });
}

#[test]
fn picard_residuals_do_not_increase_in_the_metric() {
    let (ct, ctm) = ct_pdhg(16, 12, 0.01, 0.03, 1.0).unwrap();
    let tr = picard(&ct, &Point::zeros(ct.dim()), 150, &Probe::none().metric(&ctm)).unwrap();
    let r: Vec<f64> = tr.records.iter().map(|r| r.residual_sq.unwrap()).collect();
    assert!(r.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metropolis_weights_are_symmetric_stochastic(nodes in 2usize..14, extra in 0usize..20, seed in 0u64..1000) {
        let max_edges = nodes * (nodes - 1) / 2;
        let edges = (nodes - 1 + extra).min(max_edges);
        let g = Graph::seeded_connected(nodes, edges, seed).unwrap();
        let w = metropolis_weights(&g).unwrap();
        for i in 0..nodes {
            let row: f64 = (0..nodes).map(|j| w.get(i, j)).sum();
            prop_assert!((row - 1.0).abs() < 1e-12);
            for j in 0..nodes {
                prop_assert_eq!(w.get(i, j), w.get(j, i));
                let linked = g.edges.contains(&(i, j)) || g.edges.contains(&(j, i));
                if i != j && !linked {
                    prop_assert_eq!(w.get(i, j), 0.0);
                }
                prop_assert!(w.get(i, j) >= 0.0);
            }
        }
    }
}
