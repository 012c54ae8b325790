//! Seeded random problems for property checks.

use fixpoint_core::{DenseMatrix, LinearResolvent, Point};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Point {
    Point::from((0..n).map(|_| rng.gen_range(-scale..scale)).collect::<Vec<_>>())
}

/// M = mu I + B B^T / n + S with S skew, so <Mx, x> >= mu |x|^2.
pub fn random_monotone_matrix(rng: &mut ChaCha8Rng, n: usize, mu: f64) -> DenseMatrix {
    let b: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let psd: f64 = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum();
            m.set(i, j, psd / n as f64 + if i == j { mu } else { 0.0 });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let s = rng.gen_range(-1.0..1.0);
            m.set(i, j, m.get(i, j) + s);
            m.set(j, i, m.get(j, i) - s);
        }
    }
    m
}

/// An affine mu-strongly monotone operator together with its zero.
pub fn random_linear_problem(rng: &mut ChaCha8Rng, n: usize, mu: f64) -> (LinearResolvent, Point) {
    let m = random_monotone_matrix(rng, n, mu);
    let xs = random_point(rng, n, 1.0);
    let a = LinearResolvent::new(m, mu)
        .and_then(|a| a.with_zero_at(&xs))
        .expect("random monotone matrix is well posed");
    (a, xs)
}
