#![allow(dead_code)]

use fixpoint_core::{DenseMatrix, LinearResolvent, Point};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Point {
    Point::from((0..n).map(|_| rng.gen_range(-scale..scale)).collect::<Vec<_>>())
}

pub fn to_na(p: &Point) -> DVector<f64> {
    DVector::from_column_slice(p.as_slice())
}

pub fn from_na(v: &DVector<f64>) -> Point {
    Point::from(v.as_slice().to_vec())
}

pub fn dense_to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// M = mu I + skew + B B^T / n, strongly monotone with modulus >= mu.
pub fn random_monotone_matrix(rng: &mut ChaCha8Rng, n: usize, mu: f64) -> DenseMatrix {
    let mut m = DenseMatrix::zeros(n, n);
    let b: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for i in 0..n {
        for j in 0..n {
            let mut psd = 0.0;
            for k in 0..n {
                psd += b[i * n + k] * b[j * n + k];
            }
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

/// A random affine strongly monotone operator with a random zero.
pub fn random_linear_problem(rng: &mut ChaCha8Rng, n: usize, mu: f64) -> (LinearResolvent, Point) {
    let m = random_monotone_matrix(rng, n, mu);
    let xs = random_point(rng, n, 1.0);
    let a = LinearResolvent::new(m, mu).unwrap().with_zero_at(&xs).unwrap();
    (a, xs)
}

/// sum_{k=0}^{n} r^k in double-double arithmetic.
pub fn geometric_dd(r: f64, n: usize) -> f64 {
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }
    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }
    let (mut th, mut tl) = (1.0f64, 0.0f64);
    let (mut sh, mut sl) = (0.0f64, 0.0f64);
    for _ in 0..=n {
        let (s, e) = two_sum(sh, th);
        let e = e + sl + tl;
        let (s2, e2) = two_sum(s, e);
        sh = s2;
        sl = e2;
        let (p, pe) = two_prod(th, r);
        let pe = pe + tl * r;
        let (p2, pe2) = two_sum(p, pe);
        th = p2;
        tl = pe2;
    }
    sh + sl
}
